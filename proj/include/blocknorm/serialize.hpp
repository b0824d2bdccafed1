#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "blocknorm/blocks.hpp"
#include "blocknorm/multilinear.hpp"
#include "blocknorm/seqnorms.hpp"

namespace blocknorm {

using json = nlohmann::json;

// JSON encodings shared by the CLI, the reports and the Python bindings.
// Readers take the JSON path of the value so errors name the offending field;
// they throw InputError with messages of the form "<path>: <problem>".

json to_json(const Exponent& p);
json to_json(const LpSpace& space);
json to_json(const Vector& x);
json to_json(const VecSequence& seq);
json to_json(const std::vector<VecSequence>& seqs);
json to_json(const ClassSpec& spec);
json to_json(const std::vector<ClassSpec>& specs);
json to_json(const Block& b);
/// Nested arrays of shape m_1 x ... x m_n x m_F.
json tensor_to_json(const MultiOperator& t);

Exponent exponent_from_json(const json& j, const std::string& path);
LpSpace space_from_json(const json& j, const std::string& path);
Vector vector_from_json(const json& j, const std::string& path);
std::vector<double> scalars_from_json(const json& j, const std::string& path);
VecSequence sequence_from_json(const json& j, const LpSpace& space, const std::string& path);
/// Either "strong(2)", "weak(inf)", "sup", or {"kind": ..., "p": ...}.
ClassSpec class_from_json(const json& j, const std::string& path);
std::vector<ClassSpec> classes_from_json(const json& j, const std::string& path);
/// Flattens nested arrays of the given shape, row-major.
std::vector<double> tensor_from_json(const json& j, const std::vector<std::size_t>& shape,
                                     const std::string& path);
/// Block tuples in JSON are 1-based.
Block block_from_json(const json& j, const std::string& path);

std::size_t size_from_json(const json& j, const std::string& path);
const json& require_field(const json& j, const std::string& key, const std::string& path);

}  // namespace blocknorm
