#include "blocknorm/serialize.hpp"

#include <cmath>
#include <regex>

#include "blocknorm/error.hpp"

namespace blocknorm {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InputError(path + ": " + what);
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const json& require_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

double number_from_json(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

}  // namespace

json to_json(const Exponent& p) {
  if (p.is_infinite()) return "inf";
  return p.value();
}

json to_json(const LpSpace& space) { return {{"dim", space.dim}, {"p", to_json(space.exp)}}; }

json to_json(const Vector& x) {
  json a = json::array();
  for (double v : x) a.push_back(v);
  return a;
}

json to_json(const VecSequence& seq) {
  json a = json::array();
  for (const Vector& x : seq.entries) a.push_back(to_json(x));
  return a;
}

json to_json(const std::vector<VecSequence>& seqs) {
  json a = json::array();
  for (const VecSequence& s : seqs) a.push_back(to_json(s));
  return a;
}

json to_json(const ClassSpec& spec) { return spec.to_string(); }

json to_json(const std::vector<ClassSpec>& specs) {
  json a = json::array();
  for (const ClassSpec& s : specs) a.push_back(to_json(s));
  return a;
}

json to_json(const Block& b) {
  json j = {{"bounds", b.bounds()}};
  switch (b.kind()) {
    case BlockKind::Diagonal:
      j["kind"] = "diagonal";
      break;
    case BlockKind::Full:
      j["kind"] = "full";
      break;
    case BlockKind::Equality:
      j["kind"] = "equality";
      j["positions"] = {b.equality_positions().first + 1, b.equality_positions().second + 1};
      break;
    case BlockKind::Explicit: {
      j["kind"] = "explicit";
      json members = json::array();
      for (const IndexTuple& t : b.members()) {
        json m = json::array();
        for (std::size_t i : t) m.push_back(i + 1);
        members.push_back(m);
      }
      j["members"] = members;
      break;
    }
  }
  return j;
}

json tensor_to_json(const MultiOperator& t) {
  const std::vector<std::size_t> shape = t.shape();
  const std::vector<double>& c = t.coefficients();
  std::size_t pos = 0;
  auto build = [&](auto&& self, std::size_t level) -> json {
    json a = json::array();
    for (std::size_t i = 0; i < shape[level]; ++i) {
      if (level + 1 == shape.size()) {
        a.push_back(c[pos++]);
      } else {
        a.push_back(self(self, level + 1));
      }
    }
    return a;
  };
  return build(build, 0);
}

const json& require_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, "missing field \"" + key + "\"");
  return *it;
}

std::size_t size_from_json(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    fail(path, "expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

Exponent exponent_from_json(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return Exponent::infinity();
    fail(path, "exponent must be a number >= 1 or \"inf\", got \"" + s + "\"");
  }
  const double p = number_from_json(j, path);
  if (p < 1.0) fail(path, "exponent must be >= 1, got " + j.dump());
  return Exponent(p);
}

LpSpace space_from_json(const json& j, const std::string& path) {
  const std::size_t dim = size_from_json(require_field(j, "dim", path), path + ".dim");
  if (dim == 0) fail(path + ".dim", "dimension must be positive");
  return LpSpace(dim, exponent_from_json(require_field(j, "p", path), path + ".p"));
}

Vector vector_from_json(const json& j, const std::string& path) {
  require_array(j, path);
  Vector x(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) x[i] = number_from_json(j[i], index_path(path, i));
  return x;
}

std::vector<double> scalars_from_json(const json& j, const std::string& path) {
  require_array(j, path);
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number_from_json(j[i], index_path(path, i)));
  return v;
}

VecSequence sequence_from_json(const json& j, const LpSpace& space, const std::string& path) {
  require_array(j, path);
  std::vector<Vector> entries;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Vector x = vector_from_json(j[i], index_path(path, i));
    if (static_cast<std::size_t>(x.size()) != space.dim) {
      fail(index_path(path, i), "entry has length " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(space.dim));
    }
    entries.push_back(std::move(x));
  }
  return VecSequence(space, std::move(entries));
}

ClassSpec class_from_json(const json& j, const std::string& path) {
  std::string kind;
  json p;
  if (j.is_string()) {
    static const std::regex form(R"(\s*(strong|weak|sup)\s*(?:\(\s*([^)]*?)\s*\))?\s*)");
    std::smatch m;
    const std::string s = j.get<std::string>();
    if (!std::regex_match(s, m, form)) {
      fail(path, "unrecognized class \"" + s + "\"; use strong(p), weak(p) or sup");
    }
    kind = m[1];
    if (m[2].matched) {
      const std::string arg = m[2];
      if (arg == "inf") {
        p = "inf";
      } else {
        try {
          std::size_t used = 0;
          p = std::stod(arg, &used);
          if (used != arg.size()) throw std::invalid_argument(arg);
        } catch (const std::exception&) {
          fail(path, "bad exponent \"" + arg + "\"");
        }
      }
    }
  } else if (j.is_object()) {
    const json& k = require_field(j, "kind", path);
    if (!k.is_string()) fail(path + ".kind", "expected a string");
    kind = k.get<std::string>();
    if (j.contains("p")) p = j["p"];
  } else {
    fail(path, "expected a class string or object");
  }
  if (kind == "sup") return ClassSpec::sup();
  if (kind != "strong" && kind != "weak") {
    fail(path, "unknown class kind \"" + kind + "\"");
  }
  if (p.is_null()) fail(path, kind + " class needs an exponent");
  const Exponent e = exponent_from_json(p, path + ".p");
  if (e.is_infinite()) {
    // Strong and weak l_inf both coincide with the sup class.
    return ClassSpec::sup();
  }
  return kind == "strong" ? ClassSpec::strong(e.value()) : ClassSpec::weak(e.value());
}

std::vector<ClassSpec> classes_from_json(const json& j, const std::string& path) {
  require_array(j, path);
  std::vector<ClassSpec> specs;
  for (std::size_t i = 0; i < j.size(); ++i) specs.push_back(class_from_json(j[i], index_path(path, i)));
  return specs;
}

std::vector<double> tensor_from_json(const json& j, const std::vector<std::size_t>& shape,
                                     const std::string& path) {
  std::vector<double> out;
  auto walk = [&](auto&& self, const json& node, std::size_t level,
                  const std::string& where) -> void {
    if (level == shape.size()) {
      out.push_back(number_from_json(node, where));
      return;
    }
    if (!node.is_array() || node.size() != shape[level]) {
      fail(where, "expected an array of length " + std::to_string(shape[level]) +
                      " at tensor level " + std::to_string(level + 1));
    }
    for (std::size_t i = 0; i < node.size(); ++i) self(self, node[i], level + 1, index_path(where, i));
  };
  walk(walk, j, 0, path);
  return out;
}

Block block_from_json(const json& j, const std::string& path) {
  const json& kind_j = require_field(j, "kind", path);
  if (!kind_j.is_string()) fail(path + ".kind", "expected a string");
  const std::string kind = kind_j.get<std::string>();
  const json& bounds_j = require_array(require_field(j, "bounds", path), path + ".bounds");
  std::vector<std::size_t> bounds;
  for (std::size_t i = 0; i < bounds_j.size(); ++i) {
    const std::size_t b = size_from_json(bounds_j[i], index_path(path + ".bounds", i));
    if (b == 0) fail(index_path(path + ".bounds", i), "bounds must be positive");
    bounds.push_back(b);
  }
  if (bounds.empty()) fail(path + ".bounds", "a block needs at least one coordinate");
  try {
    if (kind == "diagonal") return Block::diagonal(bounds);
    if (kind == "full") return Block::full(bounds);
    if (kind == "equality") {
      const json& pos = require_array(require_field(j, "positions", path), path + ".positions");
      if (pos.size() != 2) fail(path + ".positions", "expected two positions");
      const std::size_t a = size_from_json(pos[0], path + ".positions[0]");
      const std::size_t b = size_from_json(pos[1], path + ".positions[1]");
      if (a == 0 || b == 0 || a > bounds.size() || b > bounds.size()) {
        fail(path + ".positions", "positions are 1-based and must be <= " +
                                      std::to_string(bounds.size()));
      }
      return Block::equality(a - 1, b - 1, bounds);
    }
    if (kind == "explicit") {
      const json& mem = require_array(require_field(j, "members", path), path + ".members");
      std::vector<IndexTuple> members;
      for (std::size_t m = 0; m < mem.size(); ++m) {
        const std::string mp = index_path(path + ".members", m);
        require_array(mem[m], mp);
        IndexTuple t;
        for (std::size_t i = 0; i < mem[m].size(); ++i) {
          const std::size_t v = size_from_json(mem[m][i], index_path(mp, i));
          if (v == 0 || (i < bounds.size() && v > bounds[i])) {
            fail(mp, "tuple " + mem[m].dump() + " lies outside the bounds " +
                         json(bounds).dump() + " (indices are 1-based)");
          }
          t.push_back(v - 1);
        }
        if (t.size() != bounds.size()) {
          fail(mp, "tuple " + mem[m].dump() + " has arity " + std::to_string(t.size()) +
                       ", expected " + std::to_string(bounds.size()));
        }
        members.push_back(std::move(t));
      }
      return Block::explicit_set(bounds, std::move(members));
    }
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
  fail(path + ".kind", "unknown block kind \"" + kind + "\"");
}

}  // namespace blocknorm
