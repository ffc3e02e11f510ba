#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "htl/atoms.hpp"
#include "htl/decomposition.hpp"
#include "htl/hermite.hpp"
#include "htl/tlspace.hpp"
#include "htl/varexp.hpp"

namespace htl {

using Json = nlohmann::json;

// {dimension, degree_cap, coefficients: [[[a...], value], ...]}, nonzero
// entries in slot order. Values survive a decimal round trip exactly.
Json expansion_to_json(const HermiteExpansion& e);
HermiteExpansion expansion_from_json(const Json& j);

// {kind, params..., p_minus, p_plus, clog_local, clog_infty, p_infinity};
// the log-Holder block is estimated against the reference grid.
Json field_to_json(const ExponentField& f, const BoxGrid& reference);
// Accepts a bare number (constant), or {"kind": "constant", "value": c},
// {"kind": "affine-clamped", "a", "b", "lo", "hi"},
// {"kind": "grid-sampled", "values": [...]} with values on the given grid.
ExponentField field_from_json(const Json& j,
                              const std::shared_ptr<const BoxGrid>& grid);

Json scheme_to_json(const SamplingScheme& s);
// Starts from defaults("dimension", 1 if absent) and overrides present keys.
SamplingScheme scheme_from_json(const Json& j);

Json norm_to_json(const NormBreakdown& n, const SamplingScheme& s);
Json decomposition_to_json(const DecompositionResult& d);
Json atom_to_json(const SmoothAtom& a);

void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

}  // namespace htl
