#include "htl/io.hpp"

#include <fstream>
#include <stdexcept>

namespace htl {

namespace {

double require_number(const Json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number())
    throw std::invalid_argument(std::string("missing or non-numeric field '") +
                                field + "'");
  return j[field].get<double>();
}

int require_int(const Json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number_integer())
    throw std::invalid_argument(std::string("missing or non-integer field '") +
                                field + "'");
  return j[field].get<int>();
}

}  // namespace

Json expansion_to_json(const HermiteExpansion& e) {
  Json entries = Json::array();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double v = e.raw()[i];
    if (v == 0.0) continue;
    const MultiIndex idx = e.index_at(i);
    Json key = Json::array();
    for (int a = 0; a < e.dimension(); ++a) key.push_back(idx[a]);
    entries.push_back(Json::array({key, v}));
  }
  return Json{{"dimension", e.dimension()},
              {"degree_cap", e.degree_cap()},
              {"coefficients", entries}};
}

HermiteExpansion expansion_from_json(const Json& j) {
  const int dim = require_int(j, "dimension");
  const int cap = require_int(j, "degree_cap");
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("field 'dimension' must be 1 or 2");
  if (cap < 0 || cap > kOrderCap)
    throw std::invalid_argument("field 'degree_cap' is out of range");
  HermiteExpansion e(dim, cap);
  if (!j.contains("coefficients") || !j["coefficients"].is_array())
    throw std::invalid_argument("missing array field 'coefficients'");
  for (const auto& entry : j["coefficients"]) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_array() ||
        entry[0].size() != static_cast<std::size_t>(dim) ||
        !entry[1].is_number())
      throw std::invalid_argument(
          "field 'coefficients' entries must be [[index...], value]");
    const MultiIndex idx =
        dim == 1 ? MultiIndex(entry[0][0].get<int>())
                 : MultiIndex(entry[0][0].get<int>(), entry[0][1].get<int>());
    if (idx.order() > cap)
      throw std::invalid_argument(
          "field 'coefficients' holds an index above the degree cap");
    e.set_coefficient(idx, entry[1].get<double>());
  }
  return e;
}

Json field_to_json(const ExponentField& f, const BoxGrid& reference) {
  Json j;
  switch (f.kind()) {
    case ExponentField::Kind::kConstant:
      j["kind"] = "constant";
      j["value"] = f.param_a();
      break;
    case ExponentField::Kind::kAffineClamped:
      j["kind"] = "affine-clamped";
      j["a"] = f.param_a();
      j["b"] = f.param_b();
      j["lo"] = f.param_lo();
      j["hi"] = f.param_hi();
      break;
    case ExponentField::Kind::kGridSampled:
      j["kind"] = "grid-sampled";
      j["values"] = f.sample_values();
      break;
  }
  const FieldMeta meta = field_meta(f, reference);
  j["p_minus"] = f.min();
  j["p_plus"] = f.max();
  j["clog_local"] = meta.clog_local;
  j["clog_infty"] = meta.clog_infty;
  j["p_infinity"] = meta.p_infinity;
  return j;
}

ExponentField field_from_json(const Json& j,
                              const std::shared_ptr<const BoxGrid>& grid) {
  if (j.is_number()) return ExponentField::constant(j.get<double>());
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw std::invalid_argument("exponent spec needs a string field 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "constant")
    return ExponentField::constant(require_number(j, "value"));
  if (kind == "affine-clamped")
    return ExponentField::affine_clamped(
        require_number(j, "a"), require_number(j, "b"),
        require_number(j, "lo"), require_number(j, "hi"));
  if (kind == "grid-sampled") {
    if (!j.contains("values") || !j["values"].is_array())
      throw std::invalid_argument("grid-sampled exponent needs 'values'");
    std::vector<double> values;
    for (const auto& v : j["values"]) {
      if (!v.is_number())
        throw std::invalid_argument("field 'values' must hold numbers");
      values.push_back(v.get<double>());
    }
    if (!grid || values.size() != grid->size())
      throw std::invalid_argument(
          "field 'values' does not match the scheme grid size");
    return ExponentField::grid_sampled(grid, std::move(values));
  }
  throw std::invalid_argument("unknown exponent kind '" + kind + "'");
}

Json scheme_to_json(const SamplingScheme& s) {
  return Json{{"dimension", s.dimension},
              {"degree_cap", s.degree_cap},
              {"box_halfwidth", s.box_halfwidth},
              {"points_per_axis", s.points_per_axis},
              {"quadrature_size", s.quadrature_size},
              {"time_levels", s.time_levels},
              {"nodes_per_level", s.nodes_per_level},
              {"sup_samples_per_axis", s.sup_samples_per_axis}};
}

SamplingScheme scheme_from_json(const Json& j) {
  if (!j.is_object())
    throw std::invalid_argument("scheme spec must be an object");
  const int dim = j.contains("dimension") ? require_int(j, "dimension") : 1;
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("field 'dimension' must be 1 or 2");
  SamplingScheme s = SamplingScheme::defaults(dim);
  if (j.contains("degree_cap")) s.degree_cap = require_int(j, "degree_cap");
  if (j.contains("box_halfwidth"))
    s.box_halfwidth = require_number(j, "box_halfwidth");
  if (j.contains("points_per_axis"))
    s.points_per_axis = require_int(j, "points_per_axis");
  if (j.contains("quadrature_size"))
    s.quadrature_size = require_int(j, "quadrature_size");
  if (j.contains("time_levels")) s.time_levels = require_int(j, "time_levels");
  if (j.contains("nodes_per_level"))
    s.nodes_per_level = require_int(j, "nodes_per_level");
  if (j.contains("sup_samples_per_axis"))
    s.sup_samples_per_axis = require_int(j, "sup_samples_per_axis");
  s.validate();
  return s;
}

Json norm_to_json(const NormBreakdown& n, const SamplingScheme& s) {
  return Json{{"term_lowpass", n.term_lowpass},
              {"term_squarefn", n.term_squarefn},
              {"total", n.total},
              {"grid", scheme_to_json(s)},
              {"tails",
               {{"time", n.tail_time},
                {"space", n.tail_space},
                {"m_threshold", n.m_threshold},
                {"m_ok", n.m_ok}}}};
}

Json decomposition_to_json(const DecompositionResult& d) {
  const int dim = d.coefficients.scheme().dimension;
  Json cubes = Json::array();
  const auto& items = d.coefficients.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const DyadicCube& q = items[i].first;
    Json k = Json::array({q.k1});
    if (dim == 2) k.push_back(q.k2);
    cubes.push_back(Json{{"v", q.v},
                         {"k", k},
                         {"s", items[i].second},
                         {"size_constant", d.molecules[i].size_constant},
                         {"zero_level", d.molecules[i].zero_level}});
  }
  return Json{{"cubes", cubes},
              {"residual_l2", d.residual_l2},
              {"params",
               {{"m", d.m}, {"M", d.M}, {"N", d.N}, {"v_max", d.v_max}}},
              {"dropped", d.dropped},
              {"drop_threshold", d.drop_threshold},
              {"leakage_max", d.leakage_max},
              {"excluded_mass_rel", d.excluded_mass_rel},
              {"admissibility",
               {{"tau", d.admissibility.tau},
                {"clog", d.admissibility.clog},
                {"n_floor", d.admissibility.n_floor},
                {"m_floor", d.admissibility.m_floor},
                {"cap_floor", d.admissibility.cap_floor},
                {"n_ok", d.admissibility.n_ok},
                {"m_ok", d.admissibility.m_ok},
                {"cap_ok", d.admissibility.cap_ok},
                {"all_ok", d.admissibility.all_ok}}}};
}

Json atom_to_json(const SmoothAtom& a) {
  Json k = Json::array({a.cube().k1});
  if (a.dimension() == 2) k.push_back(a.cube().k2);
  return Json{{"cube", {{"v", a.cube().v}, {"k", k}}},
              {"dimension", a.dimension()},
              {"moment_order", a.moment_order()},
              {"smoothness_order", a.smoothness_order()},
              {"decay_exponent", a.decay_exponent()},
              {"values", a.values()}};
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace htl
