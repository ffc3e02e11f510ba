#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "htl/battery.hpp"
#include "htl/decomposition.hpp"
#include "htl/errors.hpp"
#include "htl/io.hpp"
#include "htl/operators.hpp"
#include "htl/semigroup.hpp"
#include "htl/tlspace.hpp"
#include "htl/varexp.hpp"

namespace {

using htl::Json;

// Tolerances for the kernel-check hard assertions (shared with the battery).
constexpr int kKernelTruncation = 300;
constexpr double kKernelRelTol = 1e-8;
constexpr double kKernelAbsTol = 1e-12;
constexpr double kHeatStabilityTol = 0.10;

// Problems with the configuration exit 2; numerical accuracy failures 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + std::string(e.what()));
  }
}

// Everything a task needs, resolved from flags and config with defaults
// materialized so reports can embed the exact run parameters.
struct Run {
  Json cfg;
  htl::SamplingScheme scheme;
  std::filesystem::path out;
  double refine = 1.0;
  unsigned seed = 20240823;
};

htl::ExponentField field_of(const Json& cfg, const char* key, double fallback,
                            const std::shared_ptr<const htl::BoxGrid>& grid) {
  if (!cfg.contains(key)) return htl::ExponentField::constant(fallback);
  return htl::field_from_json(cfg.at(key), grid);
}

// Accepts "name", {"name": ...}, or {"file": expansion.json}.
std::pair<htl::HermiteExpansion, Json> resolve_function(
    const Json& spec, const htl::SchemeContext& ctx) {
  if (spec.is_string())
    return {htl::named_function(spec.get<std::string>(), ctx),
            Json{{"name", spec.get<std::string>()}}};
  if (spec.is_object() && spec.contains("name"))
    return {htl::named_function(spec.at("name").get<std::string>(), ctx),
            Json{{"name", spec.at("name").get<std::string>()}}};
  if (spec.is_object() && spec.contains("file")) {
    const auto path = spec.at("file").get<std::string>();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open expansion file '" + path + "'");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ConfigError("expansion '" + path + "': " + std::string(e.what()));
    }
    return {htl::expansion_from_json(j), Json{{"file", path}}};
  }
  throw ConfigError("field 'function' must be a name or {\"file\": path}");
}

htl::ExponentField shift_field(const htl::ExponentField& f, double delta) {
  switch (f.kind()) {
    case htl::ExponentField::Kind::kConstant:
      return htl::ExponentField::constant(f.min() + delta);
    case htl::ExponentField::Kind::kAffineClamped:
      return htl::ExponentField::affine_clamped(
          f.param_a() + delta, f.param_b(), f.param_lo() + delta,
          f.param_hi() + delta);
    case htl::ExponentField::Kind::kGridSampled: {
      auto values = f.sample_values();
      for (auto& v : values) v += delta;
      return htl::ExponentField::grid_sampled(f.sample_grid(), std::move(values));
    }
  }
  throw std::logic_error("unreachable exponent kind");
}

htl::MultiplierProfile profile_of(const Json& j) {
  const auto kind = j.value("kind", std::string("exponential"));
  if (kind == "constant")
    return htl::MultiplierProfile::constant(j.value("value", 1.0));
  if (kind == "exponential")
    return htl::MultiplierProfile::exponential(j.value("amplitude", 1.0),
                                               j.value("rate", 1.0));
  if (kind == "sampled") {
    if (!j.contains("t") || !j.contains("phi"))
      throw ConfigError("sampled profile needs fields 't' and 'phi'");
    return htl::MultiplierProfile::sampled(
        j.at("t").get<std::vector<double>>(),
        j.at("phi").get<std::vector<double>>(), j.value("decay_rate", 1.0));
  }
  throw ConfigError("profile.kind must be constant, exponential, or sampled");
}

Json base_report(const Run& run, const char* task) {
  Json rep;
  rep["config"] = {{"task", task},
                   {"out", run.out.string()},
                   {"refine", run.refine},
                   {"scheme", htl::scheme_to_json(run.scheme)}};
  return rep;
}

void emit(const Run& run, const std::string& name, const std::string& text) {
  htl::write_text_file(run.out / name, text);
}

void emit_json(const Run& run, const std::string& name, const Json& j) {
  emit(run, name, j.dump(2) + "\n");
}

int do_norm(const Run& run) {
  const htl::SchemeContext ctx(run.scheme);
  auto [f, fdesc] = resolve_function(run.cfg.value("function", Json("h0")), ctx);
  const auto grid = ctx.grid();
  const auto alpha = field_of(run.cfg, "alpha", 0.0, grid);
  const auto p = field_of(run.cfg, "p", 2.0, grid);
  const auto q = field_of(run.cfg, "q", 2.0, grid);
  const int m = run.cfg.value("m", 6);

  const auto nb = htl::tl_norm(f, alpha, p, q, m, ctx);

  Json rep = base_report(run, "norm");
  rep["config"]["function"] = fdesc;
  rep["config"]["alpha"] = htl::field_to_json(alpha, *grid);
  rep["config"]["p"] = htl::field_to_json(p, *grid);
  rep["config"]["q"] = htl::field_to_json(q, *grid);
  rep["config"]["m"] = m;
  rep["norm"] = htl::norm_to_json(nb, run.scheme);
  emit_json(run, "report.json", rep);

  std::printf("norm: total %.12g (lowpass %.6g, square-function %.6g, "
              "m_ok %s)\n",
              nb.total, nb.term_lowpass, nb.term_squarefn,
              nb.m_ok ? "yes" : "no");
  return std::isfinite(nb.total) ? 0 : 1;
}

struct DecomposeSetup {
  htl::HermiteExpansion f;
  Json fdesc;
  htl::ExponentField alpha, p, q;
  int m, M, N, v_max;
  bool emit_molecules;
};

DecomposeSetup decompose_setup(const Run& run, const htl::SchemeContext& ctx) {
  auto [f, fdesc] = resolve_function(run.cfg.value("function", Json("h0")), ctx);
  const auto grid = ctx.grid();
  const Json dc = run.cfg.value("decompose", Json::object());
  return {std::move(f),
          std::move(fdesc),
          field_of(run.cfg, "alpha", 0.0, grid),
          field_of(run.cfg, "p", 2.0, grid),
          field_of(run.cfg, "q", 2.0, grid),
          dc.value("m", 6),
          dc.value("M", 4),
          dc.value("N", 2),
          dc.value("v_max", 8),
          dc.value("emit_molecules", false)};
}

Json decompose_config(const DecomposeSetup& s, const htl::SchemeContext& ctx) {
  return Json{{"function", s.fdesc},
              {"alpha", htl::field_to_json(s.alpha, *ctx.grid())},
              {"p", htl::field_to_json(s.p, *ctx.grid())},
              {"q", htl::field_to_json(s.q, *ctx.grid())},
              {"decompose",
               {{"m", s.m},
                {"M", s.M},
                {"N", s.N},
                {"v_max", s.v_max},
                {"emit_molecules", s.emit_molecules}}}};
}

int do_decompose(const Run& run) {
  const htl::SchemeContext ctx(run.scheme);
  const auto s = decompose_setup(run, ctx);
  const auto res = htl::molecular_decompose(s.f, s.m, s.M, s.N, s.v_max,
                                            s.alpha, s.p, s.q, ctx);

  Json rep = base_report(run, "decompose");
  rep["config"].update(decompose_config(s, ctx));
  rep["decomposition"] = htl::decomposition_to_json(res);
  emit_json(run, "report.json", rep);

  if (s.emit_molecules) {
    std::filesystem::create_directories(run.out / "molecules");
    for (std::size_t i = 0; i < res.molecules.size(); ++i) {
      const auto& mol = res.molecules[i];
      Json mj{{"cube", {{"v", mol.cube.v}, {"k", {mol.cube.k1}}}},
              {"zero_level", mol.zero_level},
              {"size_constant", mol.size_constant},
              {"M", mol.M},
              {"N", mol.N},
              {"b", htl::expansion_to_json(mol.b)}};
      if (run.scheme.dimension == 2) mj["cube"]["k"].push_back(mol.cube.k2);
      emit_json(run, fmt("molecules/mol-%05zu.json", i), mj);
    }
  }

  std::printf("decompose: %zu molecules, residual %.3e, dropped %zu, "
              "admissible %s\n",
              res.molecules.size(), res.residual_l2, res.dropped,
              res.admissibility.all_ok ? "yes" : "no");
  return std::isfinite(res.residual_l2) ? 0 : 1;
}

int do_validate(const Run& run) {
  const htl::SchemeContext ctx(run.scheme);
  const auto s = decompose_setup(run, ctx);
  const auto res = htl::molecular_decompose(s.f, s.m, s.M, s.N, s.v_max,
                                            s.alpha, s.p, s.q, ctx);

  std::size_t failed = 0;
  std::string csv = "index,v,k,zero_level,size_constant,audit_sup,pass\n";
  for (std::size_t i = 0; i < res.molecules.size(); ++i) {
    const auto& mol = res.molecules[i];
    const auto rep = htl::validate_molecule(mol, ctx);
    const bool good = rep.pass && std::isfinite(rep.sup_ratio) &&
                      std::isfinite(mol.size_constant);
    if (!good) ++failed;
    csv += fmt("%zu,%d,%ld,%d,%.17g,%.17g,%d\n", i, mol.cube.v, mol.cube.k1,
               mol.zero_level ? 1 : 0, mol.size_constant, rep.sup_ratio,
               good ? 1 : 0);
  }
  emit(run, "molecule-sizes.csv", csv);

  const std::size_t n = res.molecules.size();
  const std::size_t step = std::max<std::size_t>(1, n / 7);
  std::vector<std::size_t> picks;
  for (std::size_t j = 0; j < n; j += step) picks.push_back(j);
  if (!picks.empty() && picks.back() != n - 1) picks.push_back(n - 1);
  double worst_dev = 0.0;
  std::string hcsv =
      "index,v,sup_small,sup_small_fine,sup_large,sup_large_fine,"
      "dev_small,dev_large\n";
  for (const std::size_t j : picks) {
    const auto& mol = res.molecules[j];
    const auto a1 = htl::molecule_heat_audit(mol, s.m, ctx, 1);
    const auto a2 = htl::molecule_heat_audit(mol, s.m, ctx, 2);
    const double ms = std::max(a1.sup_small, a2.sup_small);
    const double ml = std::max(a1.sup_large, a2.sup_large);
    const double ds = ms > 0.0 ? std::abs(a2.sup_small - a1.sup_small) / ms : 0.0;
    const double dl = ml > 0.0 ? std::abs(a2.sup_large - a1.sup_large) / ml : 0.0;
    worst_dev = std::max({worst_dev, ds, dl});
    hcsv += fmt("%zu,%d,%.8e,%.8e,%.8e,%.8e,%.3f,%.3f\n", j, mol.cube.v,
                a1.sup_small, a2.sup_small, a1.sup_large, a2.sup_large, ds, dl);
  }
  emit(run, "molecule-heat.csv", hcsv);

  const bool pass = failed == 0 && worst_dev <= kHeatStabilityTol && n > 0;
  Json rep = base_report(run, "validate");
  rep["config"].update(decompose_config(s, ctx));
  rep["validate"] = {{"molecules", n},
                     {"failed_size_audit", failed},
                     {"heat_samples", picks.size()},
                     {"worst_heat_dev", worst_dev},
                     {"stability_tol", kHeatStabilityTol},
                     {"pass", pass}};
  emit_json(run, "report.json", rep);

  std::printf("validate: %zu molecules, %zu failed size audit\n", n, failed);
  std::printf("validate: heat-decay doubling dev %.1f%% over %zu samples "
              "(tol %.0f%%)\n",
              100.0 * worst_dev, picks.size(), 100.0 * kHeatStabilityTol);
  return pass ? 0 : 1;
}

int do_operator(const Run& run) {
  const htl::SchemeContext ctx(run.scheme);
  const auto grid = ctx.grid();
  const Json oc = run.cfg.value(
      "operator", Json{{"kind", "riesz"}, {"sigma", 1.0}});
  const auto kind = oc.value("kind", std::string("riesz"));

  const auto alpha = field_of(run.cfg, "alpha", 0.0, grid);
  const auto p = field_of(run.cfg, "p", 2.0, grid);
  const auto q = field_of(run.cfg, "q", 2.0, grid);
  const int m = run.cfg.value("m", 6);

  std::function<htl::HermiteExpansion(const htl::HermiteExpansion&)> op;
  double sigma = 0.0;
  Json op_resolved{{"kind", kind}};
  htl::ExponentField target_alpha = alpha;
  if (kind == "riesz" || kind == "bessel") {
    sigma = oc.value("sigma", 1.0);
    op_resolved["sigma"] = sigma;
    if (kind == "riesz")
      op = [sigma](const htl::HermiteExpansion& f) {
        return htl::riesz_potential(f, sigma);
      };
    else
      op = [sigma](const htl::HermiteExpansion& f) {
        return htl::bessel_potential(f, sigma);
      };
    target_alpha = shift_field(alpha, 2.0 * sigma);
  } else if (kind == "multiplier") {
    const auto prof = profile_of(
        oc.value("profile", Json{{"kind", "exponential"},
                                 {"amplitude", 1.0},
                                 {"rate", 1.0}}));
    op_resolved["profile"] =
        oc.value("profile", Json{{"kind", "exponential"},
                                 {"amplitude", 1.0},
                                 {"rate", 1.0}});
    const htl::SamplingScheme sc = run.scheme;
    op = [prof, sc](const htl::HermiteExpansion& f) {
      return htl::spectral_multiplier(f, prof, sc);
    };
  } else {
    throw ConfigError("operator.kind must be riesz, bessel, or multiplier");
  }
  if (run.cfg.contains("target_alpha"))
    target_alpha = htl::field_from_json(run.cfg.at("target_alpha"), grid);

  std::vector<std::string> names;
  std::vector<htl::HermiteExpansion> family;
  Json fdescs = Json::array();
  const Json fam = run.cfg.value(
      "family",
      Json::array({"h0", "h2+h5", "gaussian(1)", "shifted-gaussian(1)"}));
  for (const auto& spec : fam) {
    auto [f, fdesc] = resolve_function(spec, ctx);
    family.push_back(std::move(f));
    fdescs.push_back(fdesc);
  }

  const htl::SpaceParams source{alpha, p, q, m};
  const htl::SpaceParams target{target_alpha, p, q, m};
  const auto rep = htl::boundedness_report(op, family, source, target,
                                           run.scheme);
  emit(run, "boundedness.csv", rep.csv());

  bool ok = true;
  std::size_t live = 0;
  for (const auto& row : rep.rows)
    if (!row.skipped) {
      ++live;
      ok = ok && std::isfinite(row.ratio) && row.ratio > 0.0;
    }
  ok = ok && live > 0;

  Json jr = base_report(run, "operator");
  jr["config"]["operator"] = op_resolved;
  jr["config"]["family"] = fdescs;
  jr["config"]["alpha"] = htl::field_to_json(alpha, *grid);
  jr["config"]["target_alpha"] = htl::field_to_json(target_alpha, *grid);
  jr["config"]["p"] = htl::field_to_json(p, *grid);
  jr["config"]["q"] = htl::field_to_json(q, *grid);
  jr["config"]["m"] = m;
  jr["operator"] = {{"max_ratio", rep.max_ratio},
                    {"min_ratio", rep.min_ratio},
                    {"max_ratio_refined", rep.max_ratio_refined},
                    {"stable", rep.stable},
                    {"members", rep.rows.size()},
                    {"skipped", rep.rows.size() - live}};
  if (kind == "riesz" || kind == "bessel")
    jr["operator"]["smoothing_hypothesis_ok"] =
        sigma > 0.5 * run.scheme.dimension;
  emit_json(run, "report.json", jr);

  std::printf("operator: ratio range [%.6g, %.6g] over %zu members, "
              "refined max %.6g%s\n",
              rep.min_ratio, rep.max_ratio, live, rep.max_ratio_refined,
              rep.stable ? "" : "  [stability warning]");
  if ((kind == "riesz" || kind == "bessel") &&
      !(sigma > 0.5 * run.scheme.dimension))
    std::printf("operator: note: sigma <= n/2, outside the smoothing "
                "hypothesis\n");
  return ok ? 0 : 1;
}

int do_kernel_check(const Run& run) {
  const double times[] = {0.1, 0.5, 1.0, 2.0};
  std::vector<double> xs(25);
  for (int i = 0; i < 25; ++i) xs[i] = -3.0 + 0.25 * i;
  double worst_rel = 0.0, worst_abs = 0.0;
  std::string csv = "t,x,y,closed_form,spectral,abs_err,rel_err\n";
  for (const double t : times)
    for (const double x : xs)
      for (const double y : xs) {
        const double closed = htl::mehler_kernel(1, t, {x, 0.0}, {y, 0.0});
        const double spectral = htl::heat_kernel_spectral(
            1, t, {x, 0.0}, {y, 0.0}, kKernelTruncation);
        const double abs_err = std::abs(closed - spectral);
        if (std::abs(closed) >= kKernelRelTol)
          worst_rel = std::max(worst_rel, abs_err / std::abs(closed));
        else
          worst_abs = std::max(worst_abs, abs_err);
        csv += fmt("%.3g,%.3g,%.3g,%.17g,%.17g,%.3e,%.3e\n", t, x, y, closed,
                   spectral, abs_err, abs_err / std::abs(closed));
      }
  emit(run, "kernel-agreement.csv", csv);

  const int seps = static_cast<int>(std::lround(48 * run.refine));
  bool finite = true;
  Json sups = Json::array();
  for (int k = 0; k <= 4; ++k) {
    const auto rep = htl::poisson_decay_audit(1, k, seps);
    finite = finite && std::isfinite(rep.sup_ratio) && rep.sup_ratio > 0.0;
    sups.push_back({{"k", k}, {"sup_ratio", rep.sup_ratio}});
    emit(run, fmt("kernel-decay-k%d.csv", k), rep.csv());
  }
  const auto grep = htl::gaussian_bound_audit(1, seps);
  finite = finite && std::isfinite(grep.sup_ratio) && grep.sup_ratio > 0.0;
  emit(run, "gaussian-bound.csv", grep.csv());

  const bool pass =
      worst_rel <= kKernelRelTol && worst_abs <= kKernelAbsTol && finite;
  Json rep = base_report(run, "kernel-check");
  rep["kernel_check"] = {{"worst_rel", worst_rel},
                         {"worst_small_value_abs", worst_abs},
                         {"rel_tol", kKernelRelTol},
                         {"abs_tol", kKernelAbsTol},
                         {"truncation", kKernelTruncation},
                         {"separations", seps},
                         {"decay_sup", sups},
                         {"gaussian_sup", grep.sup_ratio},
                         {"pass", pass}};
  emit_json(run, "report.json", rep);

  std::printf("kernel-check: closed form vs spectral worst rel %.2e "
              "(tol %.0e), small-value abs %.2e (tol %.0e)\n",
              worst_rel, kKernelRelTol, worst_abs, kKernelAbsTol);
  std::printf("kernel-check: decay sup constants finite %s, gaussian sup "
              "%.3g, %d separations\n",
              finite ? "yes" : "no", grep.sup_ratio, seps);
  return pass ? 0 : 1;
}

int do_verify_all(const Run& run) {
  htl::BatteryOptions opt;
  opt.out_dir = run.out;
  opt.refine = run.refine;
  opt.seed = run.seed;
  const auto results = htl::run_acceptance_battery(opt);
  bool all = true;
  for (const auto& c : results) {
    std::printf("[%2d] %s  %-26s %6.1f s  %s%s\n", c.id,
                c.pass ? "PASS" : "FAIL", c.name.c_str(), c.seconds,
                c.detail.c_str(),
                c.stability_warning ? "  [stability warning]" : "");
    all = all && c.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-exponent function spaces for the Hermite operator: "
               "norms, molecular decompositions, operators, and audits"};
  app.fallthrough(true);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag;
  double refine_flag = 0.0;
  long long seed_flag = -1;
  app.add_option("--config", config_path, "JSON run configuration file");
  auto* out_opt =
      app.add_option("--out", out_flag, "directory for report.json and CSVs");
  app.add_option("--refine", refine_flag,
                 "sampling-scheme resolution multiplier (>= 1)");
  app.add_option("--seed", seed_flag, "seed for randomized suites");

  app.add_subcommand("norm", "space norm of a function");
  app.add_subcommand("decompose", "molecular decomposition of a function");
  app.add_subcommand("validate", "size and heat-decay audits of a decomposition");
  app.add_subcommand("operator", "boundedness ratio table over a test family");
  app.add_subcommand("kernel-check", "kernel closed-form agreement and decay audits");
  app.add_subcommand("verify-all", "full acceptance battery");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Run run;
    run.cfg = load_config(config_path);
    if (!run.cfg.is_object())
      throw ConfigError("config root must be a JSON object");
    run.out = out_opt->count() > 0 ? out_flag
                                   : run.cfg.value("out", "htl-report");
    run.refine = refine_flag > 0.0 ? refine_flag : run.cfg.value("refine", 1.0);
    if (!(run.refine >= 1.0)) throw ConfigError("field 'refine' must be >= 1");
    run.seed = seed_flag >= 0 ? static_cast<unsigned>(seed_flag)
                              : run.cfg.value("seed", 20240823u);
    run.scheme = htl::scheme_from_json(run.cfg.value("scheme", Json::object()));
    const std::string task = app.get_subcommands().front()->get_name();
    if (run.refine != 1.0 && task != "verify-all" && task != "kernel-check")
      run.scheme = run.scheme.refined(run.refine);
    std::filesystem::create_directories(run.out);

    if (task == "norm") return do_norm(run);
    if (task == "decompose") return do_decompose(run);
    if (task == "validate") return do_validate(run);
    if (task == "operator") return do_operator(run);
    if (task == "kernel-check") return do_kernel_check(run);
    if (task == "verify-all") return do_verify_all(run);
    std::fprintf(stderr, "unknown task '%s'\n", task.c_str());
    return 2;
  } catch (const htl::accuracy_error& e) {
    std::fprintf(stderr, "accuracy error: %s\n", e.what());
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
