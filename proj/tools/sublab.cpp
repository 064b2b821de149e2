// sublab command-line front end: one subcommand per analysis, seeded and
// reproducible, writing JSON (+ CSV ladders, SVG plots) into an output dir.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "sublab/acceptance.hpp"
#include "sublab/carnot/algebra_io.hpp"
#include "sublab/io/svg.hpp"
#include "sublab/maps/map_io.hpp"
#include "sublab/sr/frame_io.hpp"

#ifndef SUBLAB_DATA_DIR
#define SUBLAB_DATA_DIR "data"
#endif

using namespace sublab;
using io::json;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kFlagged = 2;

/// Effective options of one run; embedded verbatim in every JSON output.
struct RunConfig
{
  std::string subcommand;
  std::string frame = "heisenberg1";
  std::string map = "identity";
  std::string algebra = "heisenberg1";
  std::vector<double> point;
  std::vector<double> to;
  std::optional<double> r0;
  std::optional<int> ladder;
  std::optional<long> samples;
  std::uint64_t seed = 0;
  std::string out;
  int workers = 1;
  std::string format = "json";
  std::optional<int> grid;
  double p = 2.0;
  std::string curves;
  std::string metric = "euclidean";
  int horizontal_dims = 0;
  std::string method = "auto";
  std::vector<double> target_box;
  std::vector<int> only;
  std::string baseline;
};

const std::vector<std::string> kConfigKeys = {"frame", "map",   "algebra", "point",  "to",     "r0",     "ladder",          "samples",
                                              "seed",  "out",   "workers", "format", "grid",   "p",      "curves",          "metric",
                                              "horizontal_dims", "method", "target_box", "only", "baseline"};

json to_json(const RunConfig& c)
{
  json j = {{"subcommand", c.subcommand}, {"frame", c.frame},   {"map", c.map},         {"algebra", c.algebra},
            {"point", c.point},           {"to", c.to},         {"seed", c.seed},       {"out", c.out},
            {"workers", c.workers},       {"format", c.format}, {"p", c.p},             {"curves", c.curves},
            {"metric", c.metric},         {"horizontal_dims", c.horizontal_dims},         {"method", c.method},
            {"target_box", c.target_box}, {"only", c.only},     {"baseline", c.baseline}};
  j["r0"] = c.r0 ? json(*c.r0) : json(nullptr);
  j["ladder"] = c.ladder ? json(*c.ladder) : json(nullptr);
  j["samples"] = c.samples ? json(*c.samples) : json(nullptr);
  j["grid"] = c.grid ? json(*c.grid) : json(nullptr);
  return j;
}

/// Fills `c` from a JSON config file; flags given on the command line win.
void apply_config_file(RunConfig& c, const std::string& path, const CLI::App& app)
{
  const json doc = io::read_json_file(path);
  if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& [key, value] : doc.items())
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) throw ConfigError(key, "unknown config key");
  auto given = [&](const std::string& key) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    const auto* opt = app.get_option_no_throw(flag);
    return opt && opt->count() > 0;
  };
  auto take = [&](const std::string& key, auto& field) {
    if (!doc.contains(key) || given(key)) return;
    try {
      field = doc.at(key).get<std::remove_reference_t<decltype(field)>>();
    } catch (const json::exception&) {
      throw ConfigError(key, "wrong type in config file");
    }
  };
  auto take_opt = [&](const std::string& key, auto& field) {
    if (!doc.contains(key) || given(key) || doc.at(key).is_null()) return;
    try {
      field = doc.at(key).get<typename std::remove_reference_t<decltype(field)>::value_type>();
    } catch (const json::exception&) {
      throw ConfigError(key, "wrong type in config file");
    }
  };
  take("frame", c.frame);
  take("map", c.map);
  take("algebra", c.algebra);
  take("point", c.point);
  take("to", c.to);
  take_opt("r0", c.r0);
  take_opt("ladder", c.ladder);
  take_opt("samples", c.samples);
  take("seed", c.seed);
  take("out", c.out);
  take("workers", c.workers);
  take("format", c.format);
  take_opt("grid", c.grid);
  take("p", c.p);
  take("curves", c.curves);
  take("metric", c.metric);
  take("horizontal_dims", c.horizontal_dims);
  take("method", c.method);
  take("target_box", c.target_box);
  take("only", c.only);
  take("baseline", c.baseline);
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Vec point_or(const RunConfig& c, const Vec& fallback, int dim, const char* field = "point")
{
  if (c.point.empty() && std::string(field) == "point") return fallback;
  const auto& v = std::string(field) == "to" ? c.to : c.point;
  if (static_cast<int>(v.size()) != dim) throw ConfigError(field, "expected " + std::to_string(dim) + " coordinates");
  return to_vec(v);
}

/// Collects the artifacts of one subcommand and writes the requested formats.
struct Output
{
  const RunConfig& config;
  json result = json::object();
  bool flagged = false;
  std::string flag_reason;
  std::optional<io::CsvTable> csv;
  std::string svg;

  int write() const
  {
    const bool all = config.format == "all";
    fs::create_directories(config.out);
    const std::string stem = (fs::path(config.out) / config.subcommand).string();
    json doc = {{"version", kVersion}, {"config", to_json(config)}, {"flagged", flagged}, {"result", result}};
    if (flagged) doc["flag_reason"] = flag_reason;
    if (all || config.format == "json") io::write_text_file(stem + ".json", doc.dump(2) + "\n");
    if ((all || config.format == "csv") && csv) io::write_text_file(stem + ".csv", csv->str());
    if ((all || config.format == "svg") && !svg.empty()) io::write_text_file(stem + ".svg", svg);
    std::cout << config.subcommand << ": wrote " << stem << ".*" << (flagged ? " (flagged: " + flag_reason + ")" : "") << "\n";
    return flagged ? kFlagged : kOk;
  }
};

std::string plot(const std::vector<double>& x, const std::vector<double>& y, io::PlotSpec spec)
{
  auto out = io::emit_plot(x, y, spec);
  if (!out.warning.empty()) std::cerr << "plot: " << out.warning << "\n";
  return out.svg;
}

MapDescriptor load_map_for(const RunConfig& c) { return resolve_map(c.map, resolve_frame(c.frame)); }

// --- Subcommands ----------------------------------------------------------------

int cmd_algebra_verify(const RunConfig& c)
{
  Output out{c};
  const auto g = resolve_algebra(c.algebra);
  const auto rep = verify_structure(g);
  out.result = {{"algebra", io::json(algebra_to_json(g))}, {"validation", io::to_json(rep)}, {"layers", g.layers()}};
  if (rep.valid()) out.result["Q"] = homogeneous_dimension(g);
  out.flagged = !rep.valid();
  out.flag_reason = "structure constants violate the Carnot axioms";
  return out.write();
}

int cmd_growth(const RunConfig& c)
{
  Output out{c};
  const auto frame = resolve_frame(c.frame);
  const Vec p = point_or(c, Vec::Zero(frame.dim()), frame.dim());
  try {
    const auto na = nilpotent_approximation(frame, p);
    out.result = {{"growth", io::to_json(na.growth)},
                  {"equiregular", na.equiregular},
                  {"tangent_algebra", algebra_to_json(na.algebra)},
                  {"tangent_validation", io::to_json(na.validation)},
                  {"order_defect", na.chart.order_defect}};
    out.flagged = !na.equiregular;
    out.flag_reason = "growth vector changes near the point";
  } catch (const NonGeneratingError& e) {
    out.result = {{"growth", io::to_json(e.partial())}, {"error", e.what()}};
    out.flagged = true;
    out.flag_reason = "frame is not bracket generating at the point";
  }
  return out.write();
}

int cmd_dist(const RunConfig& c)
{
  Output out{c};
  const auto frame = resolve_frame(c.frame);
  const int n = frame.dim();
  const Vec p = point_or(c, Vec::Zero(n), n);
  if (c.to.empty()) throw ConfigError("to", "target point is required");
  const Vec q = point_or(c, Vec(), n, "to");
  DistanceOptions o;
  o.seed = c.seed;
  if (c.method == "transcription")
    o.method = DistanceMethod::Transcription;
  else if (c.method == "closed-form")
    o.method = DistanceMethod::ClosedForm;
  else if (c.method != "auto")
    throw ConfigError("method", "expected auto, transcription or closed-form");
  const auto r = cc_distance(frame, p, q, o);
  out.result = io::to_json(r);
  out.result["p"] = vec_json(p);
  out.result["q"] = vec_json(q);
  out.flagged = !r.converged;
  out.flag_reason = "distance solver did not converge";
  return out.write();
}

int cmd_ball_box(const RunConfig& c)
{
  Output out{c};
  const auto frame = resolve_frame(c.frame);
  BallVolumeOptions o;
  o.samples = c.samples.value_or(100000);
  o.seed = c.seed;
  o.workers = c.workers;
  const Vec p = point_or(c, Vec::Zero(frame.dim()), frame.dim());
  const auto rep = ball_box_report(frame, p, c.r0.value_or(1.0), c.ladder.value_or(5), o);
  out.result = io::to_json(rep);
  out.csv = io::to_csv(rep);
  out.svg = plot(rep.radii, rep.volumes, {.title = "ball volume, " + frame.name() + " (Q = " + std::to_string(rep.Q_expected) + ")", .y_label = "volume"});
  return out.write();
}

int cmd_modulus(const RunConfig& c)
{
  Output out{c};
  if (c.curves.empty()) throw ConfigError("curves", "a curve CSV file is required");
  CurveCsvOptions co;
  if (c.metric == "horizontal") {
    co.metric = LengthMetric::Horizontal;
    co.horizontal_dims = c.horizontal_dims;
  } else if (c.metric != "euclidean") {
    throw ConfigError("metric", "expected euclidean or horizontal");
  }
  const auto fam = load_curves_csv(c.curves, co);
  ModulusOptions mo;
  mo.workers = c.workers;
  const std::vector<int> cells(static_cast<std::size_t>(fam.dim()), c.grid.value_or(16));
  const auto r = modulus_p(fam, cells, c.p, mo);
  out.result = modulus_to_json(r);
  out.svg = rho_heatmap(r.rho, "extremal density, p = " + io::fmt(c.p));
  out.flagged = r.worst_violation > 1e-3;
  out.flag_reason = "density is not admissible within 1e-3";
  return out.write();
}

int cmd_dilatation(const RunConfig& c)
{
  Output out{c};
  const auto d = load_map_for(c);
  DilatationOptions o;
  o.sphere_samples = static_cast<int>(c.samples.value_or(64));
  o.workers = c.workers;
  o.target_distance.seed = c.seed;
  const Vec x = point_or(c, random_probe_points(d, 1, 0.3, c.seed).front(), d.model.domain->dim());
  const auto prof = dilatation_profile(d.model, x, c.r0.value_or(0.1), c.ladder.value_or(8), o);
  out.result = {{"map", d.name}, {"profile", io::to_json(prof)}, {"lip", io::to_json(lip_profile(prof))}};
  out.csv = io::to_csv(prof);
  std::vector<double> r, h;
  for (const auto& s : prof.steps) {
    r.push_back(s.r);
    h.push_back(s.H);
  }
  out.svg = plot(r, h, {.title = "H_f(x, r), " + d.name, .y_label = "H", .y_scale = io::AxisScale::Linear});
  out.flagged = prof.degenerate;
  out.flag_reason = "l_f below the distance noise floor";
  return out.write();
}

int cmd_pansu(const RunConfig& c)
{
  Output out{c};
  const auto d = load_map_for(c);
  const Vec x = point_or(c, random_probe_points(d, 1, 0.3, c.seed).front(), d.model.domain->dim());
  PansuOptions o;
  if (c.samples) o.samples = static_cast<int>(*c.samples);
  std::vector<double> eps, res;
  try {
    const auto fit = pansu_differential(d.model, x, o);
    out.result = {{"map", d.name}, {"point", vec_json(x)}, {"fit", io::to_json(fit)}};
    if (d.differential)
      if (const auto known = d.differential(x)) out.result["known"] = io::to_json(*known);
    out.csv = io::to_csv(fit);
    eps = fit.eps;
    res = fit.residuals;
  } catch (const NonDifferentiableError& e) {
    out.result = {{"map", d.name}, {"point", vec_json(x)}, {"eps", io::nums(e.eps())}, {"residuals", io::nums(e.residuals())}};
    out.flagged = true;
    out.flag_reason = e.what();
    eps = e.eps();
    res = e.residuals();
    out.csv = io::CsvTable{{"eps", "residual"}, {}};
    for (std::size_t i = 0; i < res.size(); ++i) out.csv->rows.push_back({eps[i], res[i]});
  }
  out.svg = plot(eps, res, {.title = "blow-up residuals, " + d.name, .x_label = "eps", .y_label = "residual"});
  return out.write();
}

int cmd_jacobian(const RunConfig& c)
{
  Output out{c};
  const auto d = load_map_for(c);
  const Vec x = point_or(c, random_probe_points(d, 1, 0.3, c.seed).front(), d.model.domain->dim());
  JacobianOptions o;
  if (c.samples) o.samples = *c.samples;
  o.seed = c.seed;
  o.workers = c.workers;
  const auto est = jacobian_volume_ratio(d.model, x, c.r0.value_or(0.1), c.ladder.value_or(3), o);
  out.result = {{"map", d.name}, {"estimate", io::to_json(est)}};
  try {
    out.result["morphism_jacobian"] = morphism_jacobian(pansu_differential(d.model, x).morphism);
  } catch (const NonDifferentiableError& e) {
    out.result["morphism_jacobian"] = nullptr;
  }
  out.csv = io::to_csv(est);
  std::vector<double> r, j;
  for (const auto& s : est.steps) {
    r.push_back(s.r);
    j.push_back(s.ratio);
  }
  out.svg = plot(r, j, {.title = "volume ratio, " + d.name, .y_label = "J", .y_scale = io::AxisScale::Linear});
  out.flagged = est.unreliable;
  out.flag_reason = "root finder failed on too many samples";
  return out.write();
}

Box box_from(const std::vector<double>& v, int n, const char* field)
{
  if (static_cast<int>(v.size()) != 2 * n) throw ConfigError(field, "expected " + std::to_string(2 * n) + " numbers (lo..., hi...)");
  return {to_vec(std::vector<double>(v.begin(), v.begin() + n)), to_vec(std::vector<double>(v.begin() + n, v.end()))};
}

int cmd_area_check(const RunConfig& c)
{
  Output out{c};
  const auto d = load_map_for(c);
  AreaOptions o;
  if (c.samples) o.samples = *c.samples;
  o.seed = c.seed;
  o.workers = c.workers;
  o.jacobian.workers = c.workers;
  std::function<double(const Vec&)> u = [](const Vec&) { return 1.0; };
  if (!c.target_box.empty()) {
    const Box t = box_from(c.target_box, d.model.target->dim(), "target_box");
    o.target = t;
    u = [t](const Vec& y) { return t.contains(y) ? 1.0 : 0.0; };
  }
  const auto r = area_formula_check(d.model, d.probe_box, u, o);
  out.result = {{"map", d.name}, {"region", {{"lo", vec_json(d.probe_box.lo)}, {"hi", vec_json(d.probe_box.hi)}}}, {"check", io::to_json(r)}};
  out.flagged = r.incomplete || r.unreliable;
  out.flag_reason = "multiplicity or Jacobian estimates did not converge everywhere";
  return out.write();
}

int cmd_ko_check(const RunConfig& c)
{
  Output out{c};
  const auto d = load_map_for(c);
  const auto rep = acceptance::line_family_ko(d, c.grid.value_or(8), c.workers, c.seed);
  out.result = {{"map", d.name}, {"report", io::to_json(rep)}};
  out.svg = rho_heatmap(rep.domain.rho, "domain extremal density");
  return out.write();
}

int cmd_branch_scan(const RunConfig& c)
{
  Output out{c};
  const auto d = load_map_for(c);
  InjectivityOptions o;
  o.grid = c.grid.value_or(17);
  o.workers = c.workers;
  const auto scan = local_injectivity_scan(d.model, d.probe_box, o);
  out.result = {{"map", d.name}, {"declared_locus", d.branch_locus}, {"scan", io::to_json(scan)}};
  out.csv = io::to_csv(scan);
  return out.write();
}

int cmd_catalog(const RunConfig& c)
{
  Output out{c};
  out.result = {{"maps", builtin_map_names()}, {"frames", {"heisenberg1", "heisenberg1-perturbed", "engel", "engel-group", "abelian(n)"}}};
  for (const auto& n : builtin_map_names()) std::cout << "  " << n << "\n";
  return out.write();
}

std::optional<double> read_baseline(const std::string& path)
{
  if (path.empty() || path == "none") return std::nullopt;
  const json doc = io::read_json_file(path);
  io::check_keys(doc, {"description", "grid", "implied_K"}, path);
  return io::parse_scalar(doc.at("implied_K"));
}

int cmd_suite(const RunConfig& c)
{
  Output out{c};
  acceptance::SuiteOptions o;
  o.seed = c.seed;
  o.workers = c.workers;
  o.only = {c.only.begin(), c.only.end()};
  const auto baseline = read_baseline(c.baseline);
  std::cout << " id  result  time      criterion\n";
  const auto results = acceptance::run_suite(o, baseline, [](const acceptance::CriterionResult& r) {
    std::cout << std::setw(3) << r.id << "  " << (r.pass ? "PASS" : "FAIL") << "  " << std::setw(7) << std::fixed << std::setprecision(1)
              << r.seconds << "s  " << r.name << ": " << r.summary << std::endl;
    std::cout.unsetf(std::ios::fixed);
  });
  out.result = {{"criteria", acceptance::suite_json(results)}};
  bool all = true;
  io::CsvTable table{{"id", "pass"}, {}};
  for (const auto& r : results) {
    all = all && r.pass;
    table.rows.push_back({static_cast<double>(r.id), r.pass ? 1.0 : 0.0});
  }
  out.result["all_pass"] = all;
  out.csv = table;
  out.flagged = !all;
  out.flag_reason = "some acceptance criteria failed";
  return out.write();
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"sublab: sub-Riemannian geometry and quasiregular map analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunConfig cfg;
  const char* env_out = std::getenv("SUBLAB_OUT");
  cfg.out = env_out && *env_out ? env_out : "sublab-out";
  std::string config_file;

  app.add_option("--config", config_file, "JSON file with run options (unknown keys are rejected)");
  app.add_option("--frame", cfg.frame, "frame name or definition file")->capture_default_str();
  app.add_option("--map", cfg.map, "built-in map spec or map file")->capture_default_str();
  app.add_option("--algebra", cfg.algebra, "algebra name or definition file")->capture_default_str();
  app.add_option("--point", cfg.point, "point coordinates, comma-separated")->delimiter(',')->allow_extra_args(false);
  app.add_option("--to", cfg.to, "second point, comma-separated (dist)")->delimiter(',')->allow_extra_args(false);
  app.add_option("--r0", cfg.r0, "largest radius of the ladder");
  app.add_option("--ladder", cfg.ladder, "number of radii, halving each step")->check(CLI::PositiveNumber);
  app.add_option("--samples", cfg.samples, "sample count (meaning depends on the subcommand)")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--out", cfg.out, "output directory (default $SUBLAB_OUT or ./sublab-out)");
  app.add_option("--workers", cfg.workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--format", cfg.format, "artifacts to write")->check(CLI::IsMember({"json", "csv", "svg", "all"}))->capture_default_str();
  app.add_option("--grid", cfg.grid, "grid cells or points per axis")->check(CLI::PositiveNumber);
  app.add_option("--p", cfg.p, "modulus exponent")->capture_default_str();
  app.add_option("--curves", cfg.curves, "curve family CSV (modulus)");
  app.add_option("--metric", cfg.metric, "curve length metric")->check(CLI::IsMember({"euclidean", "horizontal"}));
  app.add_option("--horizontal-dims", cfg.horizontal_dims, "leading coordinates measured by the horizontal metric");
  app.add_option("--method", cfg.method, "distance method")->check(CLI::IsMember({"auto", "transcription", "closed-form"}));
  app.add_option("--target-box", cfg.target_box, "indicator box lo...,hi..., comma-separated (area-check)")->delimiter(',')->allow_extra_args(false);
  app.add_option("--only", cfg.only, "criteria to run, comma-separated (suite)")->delimiter(',')->allow_extra_args(false);
  app.add_option("--baseline", cfg.baseline, "archived winding K_O baseline file, or none (suite)");
  cfg.baseline = std::string(SUBLAB_DATA_DIR) + "/baselines/winding_ko.json";

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"algebra-verify", "check Carnot axioms of an algebra"},
      {"growth", "growth vector and tangent cone of a frame at a point"},
      {"dist", "CC distance between --point and --to"},
      {"ball-box", "ball volumes along a radius ladder and the fitted exponent"},
      {"modulus", "p-modulus of a curve family"},
      {"dilatation", "H_f, H'_f and Lip profiles of a map at a point"},
      {"pansu", "Pansu differential by blow-up"},
      {"jacobian", "Jacobian by image-volume ratio"},
      {"area-check", "area formula consistency"},
      {"ko-check", "K_O inequality on a line family"},
      {"branch-scan", "candidate branch points on a grid"},
      {"suite", "run the acceptance battery"},
      {"catalog", "list built-in maps and frames"},
  };
  for (const auto& [name, help] : subs) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }

  try {
    cfg.subcommand = app.get_subcommands().front()->get_name();
    if (!config_file.empty()) apply_config_file(cfg, config_file, app);
    const std::map<std::string, int (*)(const RunConfig&)> table = {
        {"algebra-verify", cmd_algebra_verify}, {"growth", cmd_growth},       {"dist", cmd_dist},
        {"ball-box", cmd_ball_box},             {"modulus", cmd_modulus},     {"dilatation", cmd_dilatation},
        {"pansu", cmd_pansu},                   {"jacobian", cmd_jacobian},   {"area-check", cmd_area_check},
        {"ko-check", cmd_ko_check},             {"branch-scan", cmd_branch_scan}, {"suite", cmd_suite},
        {"catalog", cmd_catalog},
    };
    return table.at(cfg.subcommand)(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kError;
}
