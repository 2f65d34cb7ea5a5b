#pragma once

// Command-line driver. `run` is kept separate from main so tests can call it with
// string streams.

#include <CLI11.hpp>
#include <json.hpp>

#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cvp/anneal.hpp"
#include "cvp/bounds.hpp"
#include "cvp/certify.hpp"
#include "cvp/errors.hpp"
#include "cvp/exact.hpp"
#include "cvp/io.hpp"
#include "cvp/scan.hpp"
#include "cvp/spectral.hpp"

namespace cvp::cli {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kIoError = 3 };

struct RunConfig {
  std::string manifold = "circle";
  double tau = 1.0;
  int f = 3;
  std::size_t m = 8;
  std::uint64_t seed = 0;
  AnnealSchedule schedule;
  std::string output;  ///< empty: stdout
  std::string format;  ///< empty: json, except csv for scan
  double tau_min = 1.0;
  double tau_max = 2.2;
  double tau_step = 0.02;
  std::vector<std::string> packings;
  std::string measure;  ///< input measure file
  unsigned threads = 0;
  double eps = 0.01;
  std::size_t test_grid = 10000;
  std::optional<double> tol;  ///< classification tolerance; default 1e-2 for annealed output, 1e-6 otherwise
};

namespace detail {

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw parse_error("config: bad value for '" + key + "'");
  }
}

inline void apply_schedule_json(AnnealSchedule& s, const json& j) {
  if (!j.is_object()) throw parse_error("config: 'schedule' must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "t_start") s.t_start = get_as<double>(v, k);
    else if (k == "t_end") s.t_end = get_as<double>(v, k);
    else if (k == "cooling") s.cooling = get_as<double>(v, k);
    else if (k == "steps_per_temp") s.steps_per_temp = get_as<int>(v, k);
    else if (k == "restarts") s.restarts = get_as<int>(v, k);
    else if (k == "resolve_every") s.resolve_every = get_as<int>(v, k);
    else if (k == "step_end") s.step_end = get_as<double>(v, k);
    else if (k == "step_max") s.step_max = get_as<double>(v, k);
    else if (k == "transfer_prob") s.transfer_prob = get_as<double>(v, k);
    else throw parse_error("config: unknown schedule key '" + k + "'");
  }
}

}  // namespace detail

/// Overlay a JSON configuration on `c`. Unknown keys are rejected.
inline void apply_config_json(RunConfig& c, const json& j) {
  using detail::get_as;
  if (!j.is_object()) throw parse_error("config: expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (k == "manifold") c.manifold = get_as<std::string>(v, k);
    else if (k == "tau") c.tau = get_as<double>(v, k);
    else if (k == "f") c.f = get_as<int>(v, k);
    else if (k == "m") c.m = get_as<std::size_t>(v, k);
    else if (k == "seed") c.seed = get_as<std::uint64_t>(v, k);
    else if (k == "schedule") detail::apply_schedule_json(c.schedule, v);
    else if (k == "output") c.output = get_as<std::string>(v, k);
    else if (k == "format") c.format = get_as<std::string>(v, k);
    else if (k == "tau_min") c.tau_min = get_as<double>(v, k);
    else if (k == "tau_max") c.tau_max = get_as<double>(v, k);
    else if (k == "tau_step") c.tau_step = get_as<double>(v, k);
    else if (k == "packings") c.packings = get_as<std::vector<std::string>>(v, k);
    else if (k == "measure") c.measure = get_as<std::string>(v, k);
    else if (k == "threads") c.threads = get_as<unsigned>(v, k);
    else if (k == "eps") c.eps = get_as<double>(v, k);
    else if (k == "test_grid") c.test_grid = get_as<std::size_t>(v, k);
    else if (k == "tol") c.tol = get_as<double>(v, k);
    else throw parse_error("config: unknown key '" + k + "'");
  }
}

inline ManifoldModel to_model(const RunConfig& c) { return {parse_kind(c.manifold), c.tau, c.f}; }

/// Command-line flags for one subcommand. Each flag overrides the config file only
/// when given explicitly.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON run configuration");
  }

  template <class T>
  Flags& add(const std::string& name, const std::string& desc, std::function<void(RunConfig&, const T&)> set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(name, *value, desc);
    appliers_.push_back([opt, value, set](RunConfig& c) {
      if (opt->count() > 0) set(c, *value);
    });
    return *this;
  }

  Flags& flag(const std::string& name, const std::string& desc, bool& target) {
    app_->add_flag(name, target, desc);
    return *this;
  }

  Flags& model() {
    add<std::string>("--manifold", "circle, sphere or flag", [](RunConfig& c, const std::string& v) { c.manifold = v; });
    add<double>("--tau", "coupling tau >= 1", [](RunConfig& c, const double& v) { c.tau = v; });
    add<int>("--f", "flag dimension f >= 3", [](RunConfig& c, const int& v) { c.f = v; });
    return *this;
  }

  Flags& schedule() {
    add<std::size_t>("--m", "number of support points", [](RunConfig& c, const std::size_t& v) { c.m = v; });
    add<std::uint64_t>("--seed", "random seed", [](RunConfig& c, const std::uint64_t& v) { c.seed = v; });
    add<int>("--restarts", "annealing restarts", [](RunConfig& c, const int& v) { c.schedule.restarts = v; });
    add<int>("--steps-per-temp", "proposals per temperature", [](RunConfig& c, const int& v) { c.schedule.steps_per_temp = v; });
    add<double>("--cooling", "geometric cooling factor", [](RunConfig& c, const double& v) { c.schedule.cooling = v; });
    add<double>("--t-start", "initial temperature (relative)", [](RunConfig& c, const double& v) { c.schedule.t_start = v; });
    add<double>("--t-end", "final temperature (relative)", [](RunConfig& c, const double& v) { c.schedule.t_end = v; });
    add<unsigned>("--threads", "worker threads (default CVP_THREADS or all cores)", [](RunConfig& c, const unsigned& v) { c.threads = v; });
    return *this;
  }

  Flags& output() {
    add<std::string>("-o,--output", "output file (default stdout)", [](RunConfig& c, const std::string& v) { c.output = v; });
    add<std::string>("--format", "json or csv", [](RunConfig& c, const std::string& v) { c.format = v; });
    return *this;
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config_path_.empty()) apply_config_json(c, read_json_file(config_path_));
    for (const auto& a : appliers_) a(c);
    c.schedule.seed = c.seed;
    c.schedule.threads = c.threads;
    return c;
  }

 private:
  CLI::App* app_;
  std::string config_path_;
  std::vector<std::function<void(RunConfig&)>> appliers_;
};

inline void emit(const RunConfig& c, std::ostream& out, const std::string& text) {
  if (c.output.empty())
    out << text;
  else
    write_text_file(c.output, text);
}

inline void emit_json(const RunConfig& c, std::ostream& out, const json& j) { emit(c, out, j.dump(2) + "\n"); }

inline std::string format_or(const RunConfig& c, const std::string& dflt) {
  const std::string f = c.format.empty() ? dflt : c.format;
  if (f != "json" && f != "csv") throw usage_error("format must be json or csv, got '" + f + "'");
  return f;
}

inline void require_json(const RunConfig& c) {
  if (format_or(c, "json") != "json") throw usage_error("this command only writes json");
}

/// A measure file may hold the measure itself or a minimize result with a "measure" field.
inline AnyMeasure load_measure(const std::string& path) {
  const json j = read_json_file(path);
  if (j.is_object() && j.contains("measure") && !j.contains("manifold")) return measure_from_json(j["measure"]);
  return measure_from_json(j);
}

// ---------------------------------------------------------------------------

inline int cmd_minimize(const RunConfig& c, std::ostream& out) {
  require_json(c);
  const json j = with_model(to_model(c), [&](const auto& model) {
    const auto res = anneal_run(model, c.m, c.schedule);
    auto measure = finalize(model, res.measure);
    // Clean-up may only trade a negligible amount of action for a smaller support.
    if (action(model, measure) > res.action + 1e-9 * kernel_scale(model)) measure = res.measure;
    const CertificateReport cert = certify(model, measure, c.test_grid, c.tol.value_or(1e-2));
    return json{{"measure", measure_to_json(model, measure)},
                {"certificate", to_json(cert)},
                {"anneal",
                 {{"m", c.m},
                  {"seed", c.seed},
                  {"restarts", c.schedule.restarts},
                  {"initial_action", res.initial_action},
                  {"best_restart", res.best_restart},
                  {"restart_actions", res.restart_actions}}}};
  });
  emit_json(c, out, j);
  return kOk;
}

inline int cmd_certify(const RunConfig& c, std::ostream& out) {
  require_json(c);
  if (c.measure.empty()) throw usage_error("certify: --measure is required");
  const AnyMeasure any = load_measure(c.measure);
  const json j = std::visit(
      [&](const auto& t) { return json{{"certificate", to_json(certify(t.model, t.measure, c.test_grid, c.tol.value_or(1e-6)))}}; }, any);
  emit_json(c, out, j);
  return kOk;
}

inline int cmd_bounds(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_json(c);
  if (parse_kind(c.manifold) != ManifoldKind::Sphere) throw usage_error("bounds: only the sphere is supported");
  const Sphere s(c.tau);
  std::vector<NamedPacking> packings;
  for (const auto& path : c.packings) {
    try {
      packings.push_back({path, read_packing(path)});
    } catch (const io_error& e) {
      err << "warning: " << e.what() << ", skipped\n";
    }
  }
  std::optional<double> best;
  if (!c.measure.empty()) {
    const AnyMeasure any = load_measure(c.measure);
    const auto* t = std::get_if<TypedMeasure<Sphere>>(&any);
    if (!t) throw usage_error("bounds: measure file is not a sphere measure");
    best = action(s, t->measure);
  }
  emit_json(c, out, to_json(compute_bounds(s, packings, best)));
  return kOk;
}

inline int cmd_scan(const RunConfig& c, std::ostream& out) {
  const std::string fmt = format_or(c, "csv");
  const std::vector<double> grid = c.tau_min > c.tau_max ? std::vector<double>{} : linear_grid(c.tau_min, c.tau_max, c.tau_step);
  std::vector<ScanRow> rows;
  if (!grid.empty()) {
    ManifoldModel mm = to_model(c);
    mm.tau = grid.front();
    rows = with_model(mm, [&](const auto& model) { return tau_scan(model, grid, c.m, c.schedule); });
  }
  if (fmt == "csv") {
    std::ostringstream os;
    write_scan_csv(os, rows);
    emit(c, out, os.str());
  } else {
    json a = json::array();
    for (const auto& r : rows)
      a.push_back({{"tau", r.tau},
                   {"m", r.m},
                   {"action", r.action},
                   {"support_size", r.support_size},
                   {"classification", to_string(r.classification)},
                   {"el_residual", r.el_residual}});
    emit_json(c, out, a);
  }
  return kOk;
}

template <Manifold M>
json measure_report(const M& model, const WeightedMeasure<M>& m, const RunConfig& c) {
  return json{{"measure", measure_to_json(model, m)},
              {"action", action(model, m)},
              {"certificate", to_json(certify(model, m, c.test_grid, c.tol.value_or(1e-6)))}};
}

inline int cmd_exact(const std::string& which, const RunConfig& c, bool force, std::ostream& out) {
  require_json(c);
  json j;
  if (which == "chain") {
    const ChainMinimizer ch = circle_chain_minimizer(c.tau, force);
    j = measure_report(Circle(c.tau), ch.measure, c);
    j["m0"] = ch.m0;
    j["gamma"] = ch.gamma;
    j["closed_form_action"] = ch.lambda;
  } else if (which == "octahedron") {
    const Sphere s(c.tau);
    j = measure_report(s, octahedron(), c);
    j["nu0"] = spectral_closed_form(s).nu0;
  } else if (which == "uniform") {
    const Circle ci(c.tau);
    j = measure_report(ci, circle_uniform(static_cast<int>(c.m)), c);
    j["nu0"] = spectral_closed_form(ci).nu0;
  } else if (which == "density") {
    const Sphere s(c.tau);
    const ZonalDensity d = ex61_density();
    j = json{{"tau", c.tau},
             {"edges", d.edges},
             {"values", d.values},
             {"mass", d.mass()},
             {"moment_l1", d.legendre_moment(1)},
             {"moment_l2", d.legendre_moment(2)},
             {"action", density_action(s, d)},
             {"nu0", spectral_closed_form(s).nu0}};
  } else {
    throw usage_error("exact: unknown construction '" + which + "'");
  }
  emit_json(c, out, j);
  return kOk;
}

inline int cmd_flag_check(const RunConfig& c, std::ostream& out) {
  require_json(c);
  const FlagWitness w = flag_negative_witness(c.f, c.tau, c.eps);
  const Flag fl(c.f, c.tau);
  const double k12 = fl.kernel(w.x1, w.x2);
  const json j{{"f", c.f},
               {"tau", c.tau},
               {"eps", c.eps},
               {"g", w.g},
               {"gram", {{w.gram(0, 0), w.gram(0, 1)}, {w.gram(1, 0), w.gram(1, 1)}}},
               {"kernel_gram", {{fl.kernel(w.x1, w.x1), k12}, {k12, fl.kernel(w.x2, w.x2)}}},
               {"det", w.det},
               {"negative", w.det < 0.0},
               {"threshold", flag_gt_threshold(c.f)},
               {"nu0", spectral_closed_form(fl).nu0}};
  emit_json(c, out, j);
  return kOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical minimizers and bounds for causal variational principles"};
  app.require_subcommand(1);

  CLI::App* minimize = app.add_subcommand("minimize", "anneal a weighted counting measure and certify it");
  Flags f_min(minimize);
  f_min.model().schedule().output();
  f_min.add<std::size_t>("--test-grid", "test points for the certificate", [](RunConfig& c, const std::size_t& v) { c.test_grid = v; });
  f_min.add<double>("--tol", "classification tolerance relative to 8 tau^2", [](RunConfig& c, const double& v) { c.tol = v; });

  CLI::App* certify_cmd = app.add_subcommand("certify", "check the optimality conditions of a measure file");
  Flags f_cert(certify_cmd);
  f_cert.output();
  f_cert.add<std::string>("--measure", "measure JSON", [](RunConfig& c, const std::string& v) { c.measure = v; });
  f_cert.add<std::size_t>("--test-grid", "test points", [](RunConfig& c, const std::size_t& v) { c.test_grid = v; });
  f_cert.add<double>("--tol", "classification tolerance relative to 8 tau^2", [](RunConfig& c, const double& v) { c.tol = v; });

  CLI::App* bounds = app.add_subcommand("bounds", "lower and upper bounds on the sphere");
  Flags f_bounds(bounds);
  f_bounds.model().output();
  f_bounds.add<std::vector<std::string>>("--packing", "packing file (repeatable)",
                                         [](RunConfig& c, const std::vector<std::string>& v) { c.packings = v; });
  f_bounds.add<std::string>("--measure", "measure JSON giving an upper bound", [](RunConfig& c, const std::string& v) { c.measure = v; });

  CLI::App* scan = app.add_subcommand("scan", "tau scan with warm starts");
  Flags f_scan(scan);
  f_scan.model().schedule().output();
  f_scan.add<double>("--tau-min", "first tau", [](RunConfig& c, const double& v) { c.tau_min = v; });
  f_scan.add<double>("--tau-max", "last tau", [](RunConfig& c, const double& v) { c.tau_max = v; });
  f_scan.add<double>("--step", "tau step", [](RunConfig& c, const double& v) { c.tau_step = v; });

  CLI::App* exact = app.add_subcommand("exact", "closed-form constructions");
  exact->require_subcommand(1);
  struct ExactSub {
    std::string name;
    CLI::App* app;
    std::unique_ptr<Flags> flags;
  };
  std::vector<ExactSub> exact_subs;
  bool force = false;
  for (const char* name : {"chain", "octahedron", "uniform", "density"}) {
    CLI::App* sub = exact->add_subcommand(name);
    auto fl = std::make_unique<Flags>(sub);
    fl->output();
    fl->add<double>("--tau", "coupling", [](RunConfig& c, const double& v) { c.tau = v; });
    if (std::string(name) == "uniform")
      fl->add<std::size_t>("--m", "number of points", [](RunConfig& c, const std::size_t& v) { c.m = v; });
    if (std::string(name) == "chain") fl->flag("--force", "allow tau below the proven range", force);
    exact_subs.push_back({name, sub, std::move(fl)});
  }

  CLI::App* flag_check = app.add_subcommand("flag-check", "indefinite Gram witness on the flag manifold");
  Flags f_flag(flag_check);
  f_flag.output();
  f_flag.add<int>("--f", "flag dimension", [](RunConfig& c, const int& v) { c.f = v; });
  f_flag.add<double>("--tau", "coupling", [](RunConfig& c, const double& v) { c.tau = v; });
  f_flag.add<double>("--eps", "witness parameter in (0, 1)", [](RunConfig& c, const double& v) { c.eps = v; });

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kConfigError;
    }
    if (minimize->parsed()) return cmd_minimize(f_min.resolve(), out);
    if (certify_cmd->parsed()) return cmd_certify(f_cert.resolve(), out);
    if (bounds->parsed()) {
      RunConfig c = f_bounds.resolve();
      if (bounds->get_option("--manifold")->count() == 0 && c.manifold == "circle") c.manifold = "sphere";
      return cmd_bounds(c, out, err);
    }
    if (scan->parsed()) return cmd_scan(f_scan.resolve(), out);
    for (const auto& s : exact_subs)
      if (s.app->parsed()) return cmd_exact(s.name, s.flags->resolve(), force, out);
    if (flag_check->parsed()) return cmd_flag_check(f_flag.resolve(), out);
    err << "error: no command\n";
    return kConfigError;
  } catch (const io_error& e) {
    err << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const hypothesis_error& e) {
    err << "hypothesis violated: " << e.what() << "\n";
    return kConfigError;
  } catch (const parse_error& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const usage_error& e) {
    err << "usage error: " << e.what() << "\n";
    return kConfigError;
  } catch (const domain_error& e) {
    err << "domain error: " << e.what() << "\n";
    return kConfigError;
  } catch (const unsupported_error& e) {
    err << "unsupported: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace cvp::cli
