#pragma once

#include <string>

#include <json.hpp>

#include "bmllab/blocks.hpp"
#include "bmllab/bml.hpp"
#include "bmllab/hardy.hpp"
#include "bmllab/lorentz.hpp"
#include "bmllab/mesh.hpp"
#include "bmllab/ops.hpp"

namespace bmllab {

using json = nlohmann::json;

/// {"n", "L", "J", "values"}; loading rejects a values array of the wrong length.
json to_json(const MeshFunction& f);
MeshFunction mesh_from_json(const json& j);
MeshFunction load_mesh(const std::string& path);
void save_mesh(const std::string& path, const MeshFunction& f);

json to_json(const Rational& r);
json to_json(const StepProfile& p);
json to_json(const NormBreakdown& b);
json to_json(const OperatorSample& s);
json to_json(const BlockDecomposition& d, const BMLExponents& e);
json to_json(const Patch& p);
json to_json(const EnvelopeCertificate& c);
json to_json(const FactorizationState& s);

/// FNV-1a digest of a byte string, as 16 hex digits.
std::string digest(const std::string& bytes);

}  // namespace bmllab
