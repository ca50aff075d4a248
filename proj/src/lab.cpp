#include "homlab/lab.hpp"

#include "homlab/curvature.hpp"
#include "homlab/error.hpp"
#include "homlab/normal_coords.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace homlab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::set<std::string> kCommands{"validate", "curvature", "tuple",      "singer",    "nomizu",
                                      "distance", "collapse",  "normal-jet", "lauret-gap"};

const std::set<std::string> kKeys{"schema_version", "command", "bracket", "bracket2", "family", "normalize",
                                  "n",              "k_max",   "s",       "K",        "y",      "w",
                                  "tolerance",      "budget",  "format",  "output",   "out_dir", "seed"};

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

Eigen::VectorXd vector_field(const json& j, const char* key) {
  const auto v = get_field<std::vector<double>>(j, key);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

PowerLawFamily parse_family(const json& j) {
  if (!j.is_object()) throw ConfigError("config field 'family' must be an object");
  PowerLawFamily f;
  try {
    if (j.contains("c_eps")) f.c_eps = j.at("c_eps").get<double>();
    if (j.contains("p")) f.p = parse_exponent(j.at("p"));
    if (j.contains("c_delta")) f.c_delta = j.at("c_delta").get<double>();
    if (j.contains("r")) f.r = parse_exponent(j.at("r"));
    if (j.contains("limit")) f.limit = j.at("limit").get<double>();
    f.check();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field 'family': ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return f;
}

double param(const json& spec, const char* key, double fallback) {
  return spec.contains(key) ? get_field<double>(spec, key) : fallback;
}

RiemannTuple tower_tuple(const Bracket& b, int s) { return RiemannTuple{b.m(), s, curvature_tower(b, s)}; }

int default_s(const Bracket& b) { return singer_bound(b.m()) + 2; }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_null()) return "nan";
  return v.dump();
}

std::string multi_index_label(const std::vector<int>& q) {
  std::string s;
  for (std::size_t i = 0; i < q.size(); ++i) s += (i ? " " : "") + std::to_string(q[i]);
  return s;
}

Report run_validate(const ExperimentConfig& cfg) {
  const auto b = resolve_bracket(cfg.bracket, cfg.base_dir);
  const auto v = validate(b, cfg.tolerance);
  Report r{cfg.command, v.ok() ? kExitOk : kExitValidationFailure, to_json(v), {{"check", "value"}, {}}};
  r.table.rows = {{"jacobi_residual", v.jacobi_residual},
                  {"h1", v.h1_ok},
                  {"h2", v.h2_ok},
                  {"h3", v.h3_ok},
                  {"degenerate_subspace_dim", v.degenerate_subspace_dim}};
  return r;
}

Report run_curvature(const ExperimentConfig& cfg) {
  const auto b = resolve_bracket(cfg.bracket, cfg.base_dir);
  const int s = cfg.s >= 0 ? cfg.s : std::max(cfg.k_max, 0);
  const auto t = tower_tuple(b, s);
  const auto sec = max_abs_sec(t[0], cfg.seed);
  Report r{cfg.command, kExitOk, {{"tuple", to_json(t)}, {"max_abs_sec", sec.value}, {"certified", sec.certified}},
           {{"k", "norm"}, {}}};
  for (int k = 0; k <= s; ++k) r.table.rows.push_back({k, t[k].norm()});
  return r;
}

Report run_tuple(const ExperimentConfig& cfg) {
  const auto b = resolve_bracket(cfg.bracket, cfg.base_dir);
  const int s = cfg.s >= 0 ? cfg.s : default_s(b);
  const auto t = tower_tuple(b, s);
  const auto r1 = check_r1(t);
  const auto r2 = check_r2(t, cfg.tolerance);
  const bool ok = r1.passes(cfg.tolerance) && r2.passes();
  Report r{cfg.command, ok ? kExitOk : kExitValidationFailure,
           {{"tuple", to_json(t)}, {"r1", to_json(r1)}, {"r2", to_json(r2)}},
           {{"check", "value"}, {}}};
  for (int k = 0; k <= s; ++k) r.table.rows.push_back({"norm_" + std::to_string(k), t[k].norm()});
  static const char* labels[] = {"i", "ii", "iii", "iv", "v", "vi"};
  for (std::size_t i = 0; i < r1.residuals.size(); ++i) r.table.rows.push_back({std::string("r1_") + labels[i], r1.residuals[i]});
  r.table.rows.push_back({"r1_ok", r1.passes(cfg.tolerance)});
  r.table.rows.push_back({"r2_inclusion_ok", r2.inclusion_ok()});
  r.table.rows.push_back({"r2_kernel_ok", r2.kernel_ok()});
  return r;
}

Report run_singer(const ExperimentConfig& cfg) {
  const auto b = resolve_bracket(cfg.bracket, cfg.base_dir);
  const int s = cfg.s >= 0 ? cfg.s : default_s(b);
  const auto rep = singer_invariant(tower_tuple(b, s), cfg.tolerance);
  Report r{cfg.command, kExitOk, to_json(rep), {{"k", "kernel_dim", "singer_k"}, {}}};
  for (std::size_t k = 0; k < rep.kernels.size(); ++k) r.table.rows.push_back({static_cast<int>(k), rep.kernels[k], rep.singer_k});
  return r;
}

Report run_nomizu(const ExperimentConfig& cfg) {
  const auto b = resolve_bracket(cfg.bracket, cfg.base_dir);
  const int s = cfg.s >= 0 ? cfg.s : default_s(b);
  const auto rep = nomizu_algebra(tower_tuple(b, s), cfg.tolerance);
  Report r{cfg.command, kExitOk, to_json(rep), {{"quantity", "value"}, {}}};
  r.table.rows = {{"dim", rep.dim},
                  {"dim_truncated", rep.dim_truncated},
                  {"stabilized", rep.stabilized},
                  {"system_residual", rep.system_residual},
                  {"closure_residual", rep.closure_residual}};
  return r;
}

Report run_distance(const ExperimentConfig& cfg) {
  const auto ref = resolve_bracket(cfg.bracket2, cfg.base_dir);
  const int s = cfg.s >= 0 ? cfg.s : default_s(ref);
  const auto t2 = tower_tuple(ref, s);
  auto budget = cfg.budget;
  budget.seed = cfg.seed;
  Report r{cfg.command, kExitOk, {{"results", json::array()}}, {{"n", "s", "distance"}, {}}};
  auto add = [&](int n, const Bracket& b) {
    const auto d = tuple_distance(tower_tuple(b, s), t2, {}, budget);
    r.table.rows.push_back({n, s, d.distance});
    auto e = to_json(d);
    e["n"] = n;
    r.data["results"].push_back(e);
    if (!d.converged) r.status = kExitBudgetExhausted;
  };
  if (cfg.family) {
    for (int n : cfg.n_values) add(n, milnor_bracket(cfg.family->metric(n)));
  } else {
    add(0, resolve_bracket(cfg.bracket, cfg.base_dir));
  }
  return r;
}

Report run_collapse(const ExperimentConfig& cfg) {
  const auto& f = *cfg.family;
  const auto table = collapse_table(f, cfg.n_values, cfg.k_max);
  Report r{cfg.command, kExitOk, to_json(table), {{"n", "k", "norm", "envelope", "axis_bound"}, {}}};
  r.data["regularity_index"] = to_json(regularity_index(f));
  double R = 1.0;
  if (cfg.normalize) {
    double sup = 0.0;
    for (double v : table.max_abs_sec) sup = std::max(sup, v);
    if (sup > 0.0) R = std::sqrt(sup);
  }
  r.data["scale"] = R;
  for (const auto& row : table.rows) {
    const double factor = std::pow(R, -(row.k + 2));
    r.table.rows.push_back({row.n, row.k, row.norm * factor, row.envelope * factor, row.axis_bound * factor});
  }
  return r;
}

Report run_normal_jet(const ExperimentConfig& cfg) {
  const auto b = resolve_bracket(cfg.bracket, cfg.base_dir);
  if (cfg.y) {
    const int K = cfg.K >= 0 ? cfg.K : 2;
    const int s = cfg.s >= 0 ? cfg.s : K;
    const auto jet = radial_metric_jet(tower_tuple(b, s), *cfg.y, *cfg.w, K);
    Report r{cfg.command, kExitOk, to_json(jet), {{"order", "f_derivative"}, {}}};
    for (std::size_t n = 0; n < jet.f_derivs.size(); ++n) r.table.rows.push_back({static_cast<int>(n), jet.f_derivs[n]});
    return r;
  }
  const int K = cfg.K >= 0 ? cfg.K : 4;
  const int s = cfg.s >= 0 ? cfg.s : std::max(K - 2, 0);
  const auto jet = metric_taylor(tower_tuple(b, s), K, cfg.seed);
  Report r{cfg.command, kExitOk, to_json(jet), {{"i", "j", "q", "value"}, {}}};
  for (const auto& q : jet.indices())
    for (int i = 0; i < jet.m(); ++i)
      for (int j = i; j < jet.m(); ++j) r.table.rows.push_back({i, j, multi_index_label(q), jet.derivative(i, j, q)});
  return r;
}

Report run_lauret_gap(const ExperimentConfig& cfg) {
  const auto b1 = resolve_bracket(cfg.bracket, cfg.base_dir);
  const auto b2 = resolve_bracket(cfg.bracket2, cfg.base_dir);
  const int K = cfg.K >= 0 ? cfg.K : 2;
  const int s = cfg.s >= 0 ? cfg.s : std::max(K - 2, default_s(b1));
  auto budget = cfg.budget;
  budget.seed = cfg.seed;
  const auto g = lauret_gap(tower_tuple(b1, s), tower_tuple(b2, s), K, budget);
  Report r{cfg.command, kExitOk, to_json(g), {{"K", "aligned", "unaligned"}, {}}};
  r.table.rows.push_back({K, g.aligned, g.unaligned});
  return r;
}

}  // namespace

Bracket resolve_bracket(const json& spec, const fs::path& base_dir) {
  if (spec.is_null()) throw ConfigError("a bracket is required for this command");
  if (spec.is_string()) return resolve_bracket(json{{"preset", spec}}, base_dir);
  if (!spec.is_object()) throw ConfigError("bracket must be a preset name or an object");
  Bracket b = [&]() -> Bracket {
    if (spec.contains("file")) {
      const fs::path p = base_dir / get_field<std::string>(spec, "file");
      std::ifstream in(p);
      if (!in) throw IoError("cannot read bracket file " + p.string());
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw ConfigError("bracket file " + p.string() + ": " + e.what());
      }
      return bracket_from_json(j);
    }
    if (!spec.contains("preset")) {
      try {
        return bracket_from_json(spec);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("inline bracket: ") + e.what());
      }
    }
    const auto name = get_field<std::string>(spec, "preset");
    if (name == "mu_o") return mu_o();
    if (name == "round") return milnor_bracket(MilnorMetric(1.0, 1.0, 1.0));
    if (name == "milnor")
      return milnor_bracket(MilnorMetric(param(spec, "eps", 1.0), param(spec, "lambda1", 1.0), param(spec, "lambda2", 1.0)));
    if (name == "star") return star_family(param(spec, "eps", 1.0), param(spec, "delta", 0.0));
    if (name == "hyperbolic") return hyperbolic_bracket(static_cast<int>(param(spec, "m", 3)));
    if (name == "surface") return surface_bracket(static_cast<int>(param(spec, "eps", 1)));
    if (name == "flat") return zero_bracket(0, static_cast<int>(param(spec, "m", 3)));
    throw ConfigError("unknown bracket preset '" + name + "'");
  }();
  if (spec.contains("scale")) b = scale(b, get_field<double>(spec, "scale"));
  return b;
}

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kKeys.count(key)) throw ConfigError("unknown config field '" + key + "'");
  if (j.contains("schema_version") && get_field<int>(j, "schema_version") != 1)
    throw ConfigError("unsupported schema_version");

  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.base_dir = base_dir;
  cfg.command = get_field<std::string>(j, "command");
  if (!kCommands.count(cfg.command)) throw ConfigError("unknown command '" + cfg.command + "'");
  if (j.contains("bracket")) cfg.bracket = j.at("bracket");
  if (j.contains("bracket2")) cfg.bracket2 = j.at("bracket2");
  if (j.contains("family")) cfg.family = parse_family(j.at("family"));
  if (j.contains("normalize")) cfg.normalize = get_field<bool>(j, "normalize");
  if (j.contains("n")) cfg.n_values = get_field<std::vector<int>>(j, "n");
  if (j.contains("k_max")) cfg.k_max = get_field<int>(j, "k_max");
  if (j.contains("s")) cfg.s = get_field<int>(j, "s");
  if (j.contains("K")) cfg.K = get_field<int>(j, "K");
  if (j.contains("y")) cfg.y = vector_field(j, "y");
  if (j.contains("w")) cfg.w = vector_field(j, "w");
  if (j.contains("tolerance")) cfg.tolerance = get_field<double>(j, "tolerance");
  if (j.contains("format")) cfg.format = get_field<std::string>(j, "format");
  cfg.output = j.contains("output") ? get_field<std::string>(j, "output") : cfg.command;
  if (j.contains("out_dir")) cfg.out_dir = base_dir / get_field<std::string>(j, "out_dir");
  if (j.contains("seed")) cfg.seed = get_field<unsigned>(j, "seed");
  if (j.contains("budget")) {
    const auto& b = j.at("budget");
    if (b.contains("max_iterations")) cfg.budget.max_iterations = get_field<int>(b, "max_iterations");
    if (b.contains("screening_iterations")) cfg.budget.screening_iterations = get_field<int>(b, "screening_iterations");
    if (b.contains("refined_starts")) cfg.budget.refined_starts = get_field<int>(b, "refined_starts");
    if (b.contains("random_starts")) cfg.budget.random_starts = get_field<int>(b, "random_starts");
    if (b.contains("gradient_tolerance")) cfg.budget.gradient_tolerance = get_field<double>(b, "gradient_tolerance");
  }

  if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("format must be csv or json");
  if (cfg.output.empty() || cfg.output.find('/') != std::string::npos) throw ConfigError("output must be a plain file stem");
  if (!(cfg.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  for (int n : cfg.n_values)
    if (n < 1) throw ConfigError("n values must be positive");
  const bool needs_bracket = cfg.command != "collapse" && !(cfg.command == "distance" && cfg.family);
  if (needs_bracket && cfg.bracket.is_null()) throw ConfigError(cfg.command + " needs 'bracket'");
  if ((cfg.command == "distance" || cfg.command == "lauret-gap") && cfg.bracket2.is_null())
    throw ConfigError(cfg.command + " needs 'bracket2'");
  if (cfg.command == "collapse") {
    if (!cfg.family) throw ConfigError("collapse needs 'family'");
    if (cfg.n_values.empty()) throw ConfigError("collapse needs a non-empty 'n' list");
    if (cfg.k_max < 0) throw ConfigError("collapse needs 'k_max'");
  } else if (cfg.k_max >= 0 && cfg.s >= 0 && cfg.k_max > cfg.s) {
    // collapse columns may run past the tuple order s; everywhere else k_max indexes into the tuple
    throw ConfigError("k_max must not exceed s");
  }
  if (cfg.command == "distance" && cfg.family && cfg.n_values.empty()) throw ConfigError("distance sweep needs 'n'");
  if (cfg.y.has_value() != cfg.w.has_value()) throw ConfigError("normal-jet needs both 'y' and 'w' or neither");
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

Report run_experiment(const ExperimentConfig& cfg) {
  if (cfg.command == "validate") return run_validate(cfg);
  if (cfg.command == "curvature") return run_curvature(cfg);
  if (cfg.command == "tuple") return run_tuple(cfg);
  if (cfg.command == "singer") return run_singer(cfg);
  if (cfg.command == "nomizu") return run_nomizu(cfg);
  if (cfg.command == "distance") return run_distance(cfg);
  if (cfg.command == "collapse") return run_collapse(cfg);
  if (cfg.command == "normal-jet") return run_normal_jet(cfg);
  if (cfg.command == "lauret-gap") return run_lauret_gap(cfg);
  throw ConfigError("unknown command '" + cfg.command + "'");
}

std::string to_csv(const Report& r, const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "# homlab " << kVersion << " command=" << r.command << " status=" << r.status << " seed=" << cfg.seed << '\n';
  out << "# config: " << cfg.raw.dump() << '\n';
  out << "# columns:";
  for (const auto& c : r.table.columns) out << ' ' << c;
  out << '\n';
  for (std::size_t i = 0; i < r.table.columns.size(); ++i) out << (i ? "," : "") << r.table.columns[i];
  out << '\n';
  for (const auto& row : r.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
  return out.str();
}

json to_json(const Report& r, const ExperimentConfig& cfg) {
  json rows = json::array();
  for (const auto& row : r.table.rows) rows.push_back(row);
  return {{"schema", "homlab-report"},
          {"schema_version", kReportSchemaVersion},
          {"version", kVersion},
          {"command", r.command},
          {"status", r.status},
          {"seed", cfg.seed},
          {"config", cfg.raw},
          {"columns", r.table.columns},
          {"rows", rows},
          {"results", r.data}};
}

fs::path emit_report(const Report& r, const ExperimentConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());
  const fs::path path = cfg.out_dir / (cfg.output + "." + cfg.format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  if (cfg.format == "csv")
    out << to_csv(r, cfg);
  else
    out << to_json(r, cfg).dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
  return path;
}

int run_config(const ExperimentConfig& cfg) {
  try {
    const auto report = run_experiment(cfg);
    const auto path = emit_report(report, cfg);
    std::cerr << cfg.command << ": wrote " << path.string() << '\n';
    if (report.status == kExitValidationFailure) std::cerr << cfg.command << ": validation failed\n";
    if (report.status == kExitBudgetExhausted) std::cerr << cfg.command << ": orbit optimizer did not converge\n";
    return report.status;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const CapacityError& e) {
    std::cerr << "capacity exceeded: " << e.what() << '\n';
    return kExitBudgetExhausted;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitBudgetExhausted;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidationFailure;
  }
}

}  // namespace homlab
