#include "blocknorm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "blocknorm/rng.hpp"
#include "blocknorm/sampling.hpp"
#include "blocknorm/suites.hpp"

namespace blocknorm::cli {

namespace fs = std::filesystem;

std::string version() { return "0.1.0"; }

json to_json(const Diagnostic& d) { return {{"path", d.path}, {"message", d.message}}; }

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : InputError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                 what),
      line(line),
      column(column) {}

json parse_config(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based offset of the offending byte.
    const std::size_t offset = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ParseError(line, column, what);
  }
}

json load_config_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot read " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("BLOCKNORM_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string s(raw);
  if (s.find_first_not_of("0123456789") != std::string::npos) {
    throw InputError("BLOCKNORM_SEED must be an unsigned integer, got \"" + s + "\"");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw InputError("BLOCKNORM_SEED is out of range: \"" + s + "\"");
  }
}

Settings resolve_settings(const json& config, const Overrides& overrides,
                          std::optional<std::uint64_t> env) {
  Settings s;
  const json settings = config.is_object() ? config.value("settings", json::object()) : json();
  auto count = [&](const char* key) -> std::optional<std::uint64_t> {
    if (settings.is_object() && settings.contains(key) && settings[key].is_number_integer() &&
        settings[key].get<std::int64_t>() >= 0) {
      return settings[key].get<std::uint64_t>();
    }
    return std::nullopt;
  };
  auto number = [&](const char* key) -> std::optional<double> {
    if (settings.is_object() && settings.contains(key) && settings[key].is_number()) {
      return settings[key].get<double>();
    }
    return std::nullopt;
  };
  if (overrides.seed) {
    s.seed = *overrides.seed;
  } else if (count("seed")) {
    s.seed = *count("seed");
  } else if (env) {
    s.seed = *env;
  }
  if (overrides.budget) {
    s.budget = *overrides.budget;
  } else if (count("budget")) {
    s.budget = *count("budget");
  }
  s.tol.identity = overrides.tol_identity.value_or(number("tol_identity").value_or(s.tol.identity));
  s.tol.chain = overrides.tol_chain.value_or(number("tol_chain").value_or(s.tol.chain));
  return s;
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"norm",   "summing-norm", "check",
                                                 "witness", "validate",    "run"};
  return names;
}

json strip_timing(const json& report) {
  if (report.is_object()) {
    json out = json::object();
    for (const auto& [key, value] : report.items()) {
      if (key != "elapsed_ms") out[key] = strip_timing(value);
    }
    return out;
  }
  if (report.is_array()) {
    json out = json::array();
    for (const json& v : report) out.push_back(strip_timing(v));
    return out;
  }
  return report;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InputError(path + ": " + what);
}

Diagnostic diagnostic_from(const std::exception& e, const std::string& fallback) {
  const std::string what = e.what();
  if (!what.empty() && what[0] == '$') {
    if (auto pos = what.find(": "); pos != std::string::npos) {
      return {what.substr(0, pos), what.substr(pos + 2)};
    }
  }
  return {fallback, what};
}

std::string key_path(const std::string& path, const std::string& key) { return path + "." + key; }

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

struct OperatorEntry {
  MultiOperator op;
  std::optional<std::vector<Vec>> functionals;
  std::optional<Vec> b;
};

struct Model {
  std::map<std::string, LpSpace> spaces;
  std::map<std::string, OperatorEntry> operators;
  std::map<std::string, Block> blocks;
  std::map<std::string, std::vector<ClassSpec>> classes;
  /// The config with tensor files inlined.
  json echo;
};

struct RunContext {
  std::uint64_t seed;
  std::size_t budget;
  Tolerances tol;
};

struct JobResult {
  json result;
  bool is_check = false;
  bool pass = true;
};

using JobFn = std::function<JobResult(const RunContext&)>;

struct PreparedJob {
  std::size_t index;
  std::string command;
  json job;
  JobFn run;
};

const json* table(const json& config, const char* key, std::vector<Diagnostic>& diags) {
  if (!config.contains(key)) return nullptr;
  const json& t = config[key];
  if (!t.is_object()) {
    diags.push_back({std::string("$.") + key, "expected an object keyed by name"});
    return nullptr;
  }
  return &t;
}

LpSpace resolve_space(const Model& m, const json& j, const std::string& path) {
  if (j.is_string()) {
    auto it = m.spaces.find(j.get<std::string>());
    if (it == m.spaces.end()) fail(path, "unknown space \"" + j.get<std::string>() + "\"");
    return it->second;
  }
  return space_from_json(j, path);
}

Vec vec_in(const LpSpace& space, const json& j, const std::string& path) {
  Vector x = vector_from_json(j, path);
  if (static_cast<std::size_t>(x.size()) != space.dim) {
    fail(path, "vector has length " + std::to_string(x.size()) + ", " + space.to_string() +
                   " needs " + std::to_string(space.dim));
  }
  return Vec(space, std::move(x));
}

OperatorEntry parse_operator(const Model& m, const json& j, const std::string& path,
                             const fs::path& base, json& echo) {
  const json& doms = require_field(j, "domains", path);
  if (!doms.is_array() || doms.empty()) fail(key_path(path, "domains"), "expected a nonempty array");
  std::vector<LpSpace> domains;
  for (std::size_t i = 0; i < doms.size(); ++i) {
    domains.push_back(resolve_space(m, doms[i], index_path(key_path(path, "domains"), i)));
  }
  const LpSpace codomain =
      resolve_space(m, require_field(j, "codomain", path), key_path(path, "codomain"));
  const int sources = j.contains("tensor") + j.contains("tensor_file") + j.contains("finite_type");
  if (sources != 1) fail(path, "give exactly one of tensor, tensor_file or finite_type");

  std::vector<std::size_t> shape;
  for (const LpSpace& d : domains) shape.push_back(d.dim);
  shape.push_back(codomain.dim);

  if (j.contains("finite_type")) {
    const std::string fp = key_path(path, "finite_type");
    const json& ft = j["finite_type"];
    const json& phis = require_field(ft, "functionals", fp);
    if (!phis.is_array() || phis.size() != domains.size()) {
      fail(key_path(fp, "functionals"), "expected one functional per domain");
    }
    std::vector<Vec> functionals;
    for (std::size_t i = 0; i < phis.size(); ++i) {
      functionals.push_back(vec_in(domains[i], phis[i], index_path(key_path(fp, "functionals"), i)));
    }
    const Vec b = vec_in(codomain, require_field(ft, "b", fp), key_path(fp, "b"));
    return {finite_type(functionals, b), functionals, b};
  }
  if (j.contains("tensor")) {
    return {MultiOperator(domains, codomain, tensor_from_json(j["tensor"], shape, key_path(path, "tensor"))),
            std::nullopt, std::nullopt};
  }
  const std::string fpath = key_path(path, "tensor_file");
  if (!j["tensor_file"].is_string()) fail(fpath, "expected a file path");
  fs::path file = j["tensor_file"].get<std::string>();
  if (file.is_relative()) file = base / file;
  json tensor;
  try {
    tensor = load_config_file(file);
  } catch (const ParseError& e) {
    fail(fpath, file.string() + ": " + e.what());
  } catch (const InputError& e) {
    fail(fpath, e.what());
  }
  MultiOperator op(domains, codomain, tensor_from_json(tensor, shape, fpath + " (" + file.string() + ")"));
  echo.erase("tensor_file");
  echo["tensor"] = tensor;
  return {std::move(op), std::nullopt, std::nullopt};
}

Model build_model(const json& config, const fs::path& base, std::vector<Diagnostic>& diags) {
  Model m;
  m.echo = config;
  for (const auto& [key, value] : config.items()) {
    static const std::vector<std::string> known = {"spaces", "operators", "blocks", "classes",
                                                   "jobs",   "settings",  "description"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      diags.push_back({"$." + key, "unknown top-level key"});
    }
  }
  if (const json* t = table(config, "spaces", diags)) {
    for (const auto& [name, value] : t->items()) {
      const std::string path = "$.spaces." + name;
      try {
        m.spaces.emplace(name, space_from_json(value, path));
      } catch (const Error& e) {
        diags.push_back(diagnostic_from(e, path));
      }
    }
  }
  if (const json* t = table(config, "operators", diags)) {
    for (const auto& [name, value] : t->items()) {
      const std::string path = "$.operators." + name;
      try {
        m.operators.emplace(name, parse_operator(m, value, path, base, m.echo["operators"][name]));
      } catch (const Error& e) {
        diags.push_back(diagnostic_from(e, path));
      }
    }
  }
  if (const json* t = table(config, "blocks", diags)) {
    for (const auto& [name, value] : t->items()) {
      const std::string path = "$.blocks." + name;
      try {
        m.blocks.emplace(name, block_from_json(value, path));
      } catch (const Error& e) {
        diags.push_back(diagnostic_from(e, path));
      }
    }
  }
  if (const json* t = table(config, "classes", diags)) {
    for (const auto& [name, value] : t->items()) {
      const std::string path = "$.classes." + name;
      try {
        m.classes.emplace(name, classes_from_json(value, path));
      } catch (const Error& e) {
        diags.push_back(diagnostic_from(e, path));
      }
    }
  }
  if (config.contains("settings")) {
    const json& s = config["settings"];
    if (!s.is_object()) {
      diags.push_back({"$.settings", "expected an object"});
    } else {
      for (const auto& [key, value] : s.items()) {
        const std::string path = "$.settings." + key;
        if (key == "seed" || key == "budget") {
          if (!value.is_number_unsigned()) diags.push_back({path, "expected a nonnegative integer"});
        } else if (key == "tol_identity" || key == "tol_chain") {
          if (!value.is_number() || value.get<double>() < 0.0) {
            diags.push_back({path, "expected a nonnegative number"});
          }
        } else {
          diags.push_back({path, "unknown setting"});
        }
      }
    }
  }
  return m;
}

// ---- job field accessors ----

const OperatorEntry& get_operator(const Model& m, const json& job, const std::string& key,
                                  const std::string& path) {
  const json& ref = require_field(job, key, path);
  if (!ref.is_string()) fail(key_path(path, key), "expected an operator name");
  auto it = m.operators.find(ref.get<std::string>());
  if (it == m.operators.end()) {
    fail(key_path(path, key), "unknown operator \"" + ref.get<std::string>() + "\"");
  }
  return it->second;
}

LinearMap get_linear_map(const Model& m, const json& ref, const std::string& path) {
  if (!ref.is_string()) fail(path, "expected an operator name");
  auto it = m.operators.find(ref.get<std::string>());
  if (it == m.operators.end()) fail(path, "unknown operator \"" + ref.get<std::string>() + "\"");
  const MultiOperator& op = it->second.op;
  if (op.arity() != 1) fail(path, "a linear map needs exactly one domain");
  const std::size_t rows = op.domains()[0].dim;
  const std::size_t cols = op.codomain().dim;
  Matrix mat(cols, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t o = 0; o < cols; ++o) mat(o, i) = op.coefficients()[i * cols + o];
  }
  return LinearMap(op.domains()[0], op.codomain(), std::move(mat));
}

Block get_block(const Model& m, const json& job, const std::string& path) {
  const json& ref = require_field(job, "block", path);
  if (ref.is_string()) {
    auto it = m.blocks.find(ref.get<std::string>());
    if (it == m.blocks.end()) {
      fail(key_path(path, "block"), "unknown block \"" + ref.get<std::string>() + "\"");
    }
    return it->second;
  }
  return block_from_json(ref, key_path(path, "block"));
}

std::vector<ClassSpec> get_classes(const Model& m, const json& job, const std::string& key,
                                   const std::string& path) {
  const json& ref = require_field(job, key, path);
  if (ref.is_string()) {
    auto it = m.classes.find(ref.get<std::string>());
    if (it != m.classes.end()) return it->second;
    // A bare class string such as "strong(2)" is also accepted.
    try {
      return {class_from_json(ref, key_path(path, key))};
    } catch (const InputError&) {
      fail(key_path(path, key), "unknown class list \"" + ref.get<std::string>() + "\"");
    }
  }
  return classes_from_json(ref, key_path(path, key));
}

ClassSpec get_class(const json& job, const std::string& key, const std::string& path) {
  return class_from_json(require_field(job, key, path), key_path(path, key));
}

double get_number(const json& job, const std::string& key, const std::string& path,
                  std::optional<double> fallback = std::nullopt) {
  if (!job.contains(key)) {
    if (fallback) return *fallback;
    fail(path, "missing field \"" + key + "\"");
  }
  if (!job[key].is_number()) fail(key_path(path, key), "expected a number");
  return job[key].get<double>();
}

double get_exponent(const json& job, const std::string& key, const std::string& path) {
  const Exponent e = exponent_from_json(require_field(job, key, path), key_path(path, key));
  if (e.is_infinite()) fail(key_path(path, key), "a finite exponent is required here");
  return e.value();
}

std::size_t get_size(const json& job, const std::string& key, const std::string& path,
                     std::size_t fallback) {
  if (!job.contains(key)) return fallback;
  return size_from_json(job[key], key_path(path, key));
}

void require_count(std::size_t got, std::size_t want, const std::string& path,
                   const std::string& what) {
  if (got != want) {
    fail(path, "expected " + std::to_string(want) + " " + what + ", got " + std::to_string(got));
  }
}

std::size_t default_truncation(const Block& b) {
  return *std::max_element(b.bounds().begin(), b.bounds().end());
}

using Samples = std::vector<std::vector<VecSequence>>;
using SampleFn = std::function<Samples(std::uint64_t seed)>;

// Explicit "samples" (validated now) or "sample_count" random tuples drawn at
// run time with lengths in [min_length, min(max_length, cap)].
SampleFn sample_source(const json& job, const std::string& path,
                       const std::vector<LpSpace>& spaces, const std::vector<std::size_t>& caps,
                       std::size_t min_length) {
  if (job.contains("samples")) {
    const std::string sp = key_path(path, "samples");
    const json& s = job["samples"];
    if (!s.is_array()) fail(sp, "expected an array of sequence tuples");
    Samples samples;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string tp = index_path(sp, i);
      if (!s[i].is_array()) fail(tp, "expected one sequence per slot");
      require_count(s[i].size(), spaces.size(), tp, "sequences");
      std::vector<VecSequence> tuple;
      for (std::size_t k = 0; k < spaces.size(); ++k) {
        VecSequence seq = sequence_from_json(s[i][k], spaces[k], index_path(tp, k));
        if (seq.size() > caps[k]) {
          fail(index_path(tp, k), "sequence length " + std::to_string(seq.size()) +
                                      " exceeds the bound " + std::to_string(caps[k]));
        }
        tuple.push_back(std::move(seq));
      }
      samples.push_back(std::move(tuple));
    }
    return [samples](std::uint64_t) { return samples; };
  }
  const std::size_t count = get_size(job, "sample_count", path, 10);
  const std::size_t max_length = get_size(job, "max_length", path, 3);
  if (max_length < std::max<std::size_t>(min_length, 1)) {
    fail(key_path(path, "max_length"), "must be at least 1");
  }
  std::vector<std::size_t> limits;
  for (std::size_t cap : caps) limits.push_back(std::min(cap, max_length));
  return [=](std::uint64_t seed) {
    Rng rng(derive_seed(seed, {0x73616d70}));
    Samples samples;
    for (std::size_t i = 0; i < count; ++i) {
      samples.push_back(random_sequences(rng, spaces, limits, min_length));
    }
    return samples;
  };
}

json points_json(const std::vector<Vector>& xs) {
  json a = json::array();
  for (const Vector& x : xs) a.push_back(blocknorm::to_json(x));
  return a;
}

void check_stack_arity(const std::vector<ClassSpec>& specs, std::size_t n, const std::string& path,
                       const std::string& key) {
  require_count(specs.size(), n, key_path(path, key), "classes");
}

// ---- commands ----

JobFn prepare_norm(const Model& m, const json& job, const std::string& path) {
  if (job.contains("operator")) {
    const MultiOperator t = get_operator(m, job, "operator", path).op;
    return [t](const RunContext& ctx) {
      const NormResult r = sup_norm(t, {ctx.budget, ctx.seed});
      return JobResult{{{"kind", "operator"},
                        {"value", r.value},
                        {"exact", r.exact},
                        {"witness", points_json(split_witness(t, r.witness))}}};
    };
  }
  const LpSpace space = resolve_space(m, require_field(job, "space", path), key_path(path, "space"));
  const ClassSpec spec = get_class(job, "class", path);
  const VecSequence seq =
      sequence_from_json(require_field(job, "sequence", path), space, key_path(path, "sequence"));
  return [=](const RunContext& ctx) {
    const NormResult r = class_norm(spec, seq, {ctx.budget, ctx.seed});
    return JobResult{{{"kind", "sequence"}, {"value", r.value}, {"exact", r.exact}}};
  };
}

JobFn prepare_summing(const Model& m, const json& job, const std::string& path) {
  const MultiOperator t = get_operator(m, job, "operator", path).op;
  const Block b = get_block(m, job, path);
  const auto xs = get_classes(m, job, "x", path);
  const auto stack = get_classes(m, job, "stack", path);
  const std::size_t n = t.arity();
  require_count(b.arity(), n, key_path(path, "block"), "block coordinates");
  check_stack_arity(xs, n, path, "x");
  check_stack_arity(stack, n, path, "stack");
  try {
    require_supported(stack);
  } catch (const UnsupportedClassPosition& e) {
    fail(key_path(path, "stack"), std::string("UnsupportedClassPosition: ") + e.what());
  }
  const std::size_t k = get_size(job, "k", path, default_truncation(b));
  if (k == 0) fail(key_path(path, "k"), "truncation must be positive");
  const std::optional<double> expect =
      job.contains("expect") ? std::optional(get_number(job, "expect", path)) : std::nullopt;
  return [=](const RunContext& ctx) {
    const SummingEstimate est = summing_norm(t, b, xs, stack, k, {ctx.budget, ctx.seed});
    JobResult r;
    r.result = {{"value", est.value},
                {"lower_bound", true},
                {"exact", est.exact},
                {"witness", blocknorm::to_json(est.witness)},
                {"family", est.family},
                {"evaluations", est.evaluations},
                {"truncation", est.truncation},
                {"budget", est.budget},
                {"seed", est.seed}};
    if (expect) {
      r.is_check = true;
      r.pass = std::abs(est.value - *expect) <= ctx.tol.chain * std::max(1.0, std::abs(*expect));
      r.result["expected"] = *expect;
    }
    return r;
  };
}

JobFn prepare_witness(const Model& m, const json& job, const std::string& path) {
  const Block b = get_block(m, job, path);
  const auto xs = get_classes(m, job, "x", path);
  const auto stack = get_classes(m, job, "stack", path);
  check_stack_arity(xs, b.arity(), path, "x");
  check_stack_arity(stack, b.arity(), path, "stack");
  try {
    require_supported(stack);
  } catch (const UnsupportedClassPosition& e) {
    fail(key_path(path, "stack"), std::string("UnsupportedClassPosition: ") + e.what());
  }
  const std::size_t k = get_size(job, "k", path, default_truncation(b));
  if (k == 0) fail(key_path(path, "k"), "truncation must be positive");
  std::optional<bool> expect_incompatible;
  if (job.contains("expect")) {
    const json& e = job["expect"];
    if (e == "incompatible") {
      expect_incompatible = true;
    } else if (e == "compatible") {
      expect_incompatible = false;
    } else {
      fail(key_path(path, "expect"), "expected \"compatible\" or \"incompatible\"");
    }
  }
  const std::optional<double> min_margin =
      job.contains("min_margin") ? std::optional(get_number(job, "min_margin", path))
                                 : std::nullopt;
  return [=](const RunContext& ctx) {
    const CompatReport rep =
        find_incompatibility_witness(xs, stack, b, k, {ctx.budget, ctx.seed}, ctx.tol.identity);
    JobResult r;
    r.result = blocknorm::to_json(rep);
    r.result["truncation"] = k;
    r.result["certifies_incompatibility"] = !rep.pass;
    if (expect_incompatible || min_margin) {
      r.is_check = true;
      if (expect_incompatible) r.pass = r.pass && (*expect_incompatible == !rep.pass);
      if (min_margin) r.pass = r.pass && rep.worst_margin >= *min_margin;
    }
    return r;
  };
}

JobResult check_result(const std::vector<CheckReport>& reports) {
  JobResult r;
  r.is_check = true;
  json list = json::array();
  for (const CheckReport& c : reports) {
    list.push_back(blocknorm::to_json(c));
    r.pass = r.pass && c.pass;
  }
  r.result = {{"checks", list}};
  return r;
}

JobFn prepare_check(const Model& m, const json& job, const std::string& path) {
  const bool has_suite = job.contains("suite") || job.contains("suites");
  if (has_suite == job.contains("theorem")) {
    fail(path, "a check job needs either \"suites\" or \"theorem\"");
  }
  if (has_suite) {
    std::vector<std::string> names;
    const std::string key = job.contains("suites") ? "suites" : "suite";
    const json& s = job[key];
    if (s == "all") {
      names = suite_names();
    } else if (s.is_string()) {
      names.push_back(s.get<std::string>());
    } else if (s.is_array()) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].is_string()) fail(index_path(key_path(path, key), i), "expected a suite name");
        names.push_back(s[i].get<std::string>());
      }
    } else {
      fail(key_path(path, key), "expected a suite name, a list of names or \"all\"");
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto& all = suite_names();
      if (std::find(all.begin(), all.end(), names[i]) == all.end()) {
        std::string known;
        for (const auto& a : all) known += (known.empty() ? "" : ", ") + a;
        fail(key_path(path, key), "unknown suite \"" + names[i] + "\"; known: " + known);
      }
    }
    const std::size_t instances = get_size(job, "instances", path, 50);
    return [=](const RunContext& ctx) {
      std::vector<CheckReport> reports;
      for (std::size_t i = 0; i < names.size(); ++i) {
        reports.push_back(run_suite(names[i], {instances, derive_seed(ctx.seed, {i}), ctx.budget, ctx.tol}));
      }
      return check_result(reports);
    };
  }

  const json& th = job["theorem"];
  if (!th.is_string()) fail(key_path(path, "theorem"), "expected a theorem name");
  const std::string theorem = th.get<std::string>();

  if (theorem == "finite-type") {
    const OperatorEntry& entry = get_operator(m, job, "operator", path);
    if (!entry.functionals) {
      fail(key_path(path, "operator"), "the finite-type check needs an operator given by finite_type");
    }
    const auto functionals = *entry.functionals;
    const Vec b = *entry.b;
    const Block block = get_block(m, job, path);
    const auto xs = get_classes(m, job, "x", path);
    const auto stack = get_classes(m, job, "stack", path);
    const std::size_t n = functionals.size();
    require_count(block.arity(), n, key_path(path, "block"), "block coordinates");
    check_stack_arity(xs, n, path, "x");
    check_stack_arity(stack, n, path, "stack");
    require_supported(stack);
    const std::size_t k = get_size(job, "k", path, default_truncation(block));
    return [=](const RunContext& ctx) {
      return check_result({check_finite_type_norm(functionals, b, block, xs, stack, k,
                                                  {ctx.budget, ctx.seed}, ctx.tol)});
    };
  }
  if (theorem == "compatibility") {
    const Block block = get_block(m, job, path);
    const auto xs = get_classes(m, job, "x", path);
    const auto stack = get_classes(m, job, "stack", path);
    check_stack_arity(xs, block.arity(), path, "x");
    check_stack_arity(stack, block.arity(), path, "stack");
    require_supported(stack);
    std::vector<std::vector<ScalarSequence>> explicit_samples;
    if (job.contains("samples")) {
      const std::string sp = key_path(path, "samples");
      if (!job["samples"].is_array()) fail(sp, "expected an array of scalar-sequence tuples");
      for (std::size_t i = 0; i < job["samples"].size(); ++i) {
        const json& tuple = job["samples"][i];
        if (!tuple.is_array()) fail(index_path(sp, i), "expected one sequence per slot");
        require_count(tuple.size(), block.arity(), index_path(sp, i), "sequences");
        std::vector<ScalarSequence> t;
        for (std::size_t k = 0; k < tuple.size(); ++k) {
          t.push_back(scalars_from_json(tuple[k], index_path(index_path(sp, i), k)));
          if (t.back().size() > block.bounds()[k]) {
            fail(index_path(index_path(sp, i), k), "sequence longer than the block bound");
          }
        }
        explicit_samples.push_back(std::move(t));
      }
    }
    const std::size_t count = get_size(job, "sample_count", path, 100);
    const bool use_explicit = job.contains("samples");
    return [=](const RunContext& ctx) {
      auto samples = explicit_samples;
      if (!use_explicit) {
        Rng rng(derive_seed(ctx.seed, {0x73616d70}));
        for (std::size_t i = 0; i < count; ++i) {
          std::vector<ScalarSequence> t;
          for (std::size_t bound : block.bounds()) {
            t.push_back(random_scalar_sequence(rng, uniform_index(rng, 1, bound)));
          }
          samples.push_back(std::move(t));
        }
      }
      const CompatReport rep = check_compatibility(xs, stack, block, samples, ctx.tol.identity);
      JobResult r;
      r.is_check = true;
      r.pass = rep.pass;
      r.result = {{"checks", json::array({{{"check", "compatibility"},
                                           {"pass", rep.pass},
                                           {"report", blocknorm::to_json(rep)}}})}};
      return r;
    };
  }
  if (theorem == "norm-domination") {
    const MultiOperator t = get_operator(m, job, "operator", path).op;
    const Block block = get_block(m, job, path);
    const auto xs = get_classes(m, job, "x", path);
    const auto stack = get_classes(m, job, "stack", path);
    require_count(block.arity(), t.arity(), key_path(path, "block"), "block coordinates");
    check_stack_arity(xs, t.arity(), path, "x");
    check_stack_arity(stack, t.arity(), path, "stack");
    require_supported(stack);
    const std::size_t k = get_size(job, "k", path, default_truncation(block));
    std::vector<std::vector<Vector>> points;
    if (job.contains("points")) {
      const std::string pp = key_path(path, "points");
      if (!job["points"].is_array()) fail(pp, "expected an array of point tuples");
      for (std::size_t i = 0; i < job["points"].size(); ++i) {
        const json& tuple = job["points"][i];
        if (!tuple.is_array()) fail(index_path(pp, i), "expected one vector per slot");
        require_count(tuple.size(), t.arity(), index_path(pp, i), "vectors");
        std::vector<Vector> xsv;
        for (std::size_t s = 0; s < t.arity(); ++s) {
          xsv.push_back(vec_in(t.domains()[s], tuple[s], index_path(index_path(pp, i), s)).coords);
        }
        points.push_back(std::move(xsv));
      }
    }
    const std::size_t count = get_size(job, "sample_count", path, 10);
    return [=](const RunContext& ctx) {
      auto pts = points;
      if (pts.empty()) {
        Rng rng(derive_seed(ctx.seed, {0x73616d70}));
        for (std::size_t i = 0; i < count; ++i) {
          std::vector<Vector> xsv;
          for (const LpSpace& d : t.domains()) xsv.push_back(gaussian_vector(rng, d.dim));
          pts.push_back(std::move(xsv));
        }
      }
      return check_result(
          {check_norm_domination(t, block, xs, stack, pts, k, {ctx.budget, ctx.seed}, ctx.tol)});
    };
  }
  if (theorem == "ideal") {
    const MultiOperator t = get_operator(m, job, "operator", path).op;
    const LinearMap v = get_linear_map(m, require_field(job, "v", path), key_path(path, "v"));
    const json& us_j = require_field(job, "us", path);
    if (!us_j.is_array()) fail(key_path(path, "us"), "expected a list of operator names");
    require_count(us_j.size(), t.arity(), key_path(path, "us"), "inner maps");
    std::vector<LinearMap> us;
    std::vector<LpSpace> inner;
    std::vector<std::size_t> caps;
    for (std::size_t i = 0; i < us_j.size(); ++i) {
      us.push_back(get_linear_map(m, us_j[i], index_path(key_path(path, "us"), i)));
      inner.push_back(us.back().domain());
    }
    const Block block = get_block(m, job, path);
    const auto xs = get_classes(m, job, "x", path);
    const auto stack = get_classes(m, job, "stack", path);
    require_count(block.arity(), t.arity(), key_path(path, "block"), "block coordinates");
    check_stack_arity(xs, t.arity(), path, "x");
    check_stack_arity(stack, t.arity(), path, "stack");
    require_supported(stack);
    try {
      compose(v, t, us);
    } catch (const InputError& e) {
      fail(path, e.what());
    }
    const SampleFn samples = sample_source(job, path, inner, block.bounds(), 1);
    return [=](const RunContext& ctx) {
      return check_result({check_ideal_inequality(v, t, us, block, xs, stack, samples(ctx.seed),
                                                  {ctx.budget, ctx.seed}, ctx.tol)});
    };
  }
  if (theorem == "diagonal") {
    const MultiOperator t = get_operator(m, job, "operator", path).op;
    const double q = get_exponent(job, "q", path);
    const ClassSpec z = get_class(job, "z", path);
    ClassStack stack(t.arity(), z);
    stack.front() = ClassSpec::strong(q);
    require_supported(stack);
    const SampleFn samples = sample_source(job, path, t.domains(),
                                           std::vector<std::size_t>(t.arity(), SIZE_MAX), 1);
    return [=](const RunContext& ctx) {
      return check_result({check_diagonal_reduction(t, q, z, samples(ctx.seed), ctx.tol)});
    };
  }
  if (theorem == "multiple") {
    const MultiOperator t = get_operator(m, job, "operator", path).op;
    const json& qj = require_field(job, "q", path);
    if (!qj.is_array()) fail(key_path(path, "q"), "expected one exponent per slot");
    require_count(qj.size(), t.arity(), key_path(path, "q"), "exponents");
    std::vector<double> qs;
    for (std::size_t i = 0; i < qj.size(); ++i) {
      const Exponent e = exponent_from_json(qj[i], index_path(key_path(path, "q"), i));
      if (e.is_infinite()) fail(index_path(key_path(path, "q"), i), "a finite exponent is required");
      qs.push_back(e.value());
    }
    const SampleFn samples = sample_source(job, path, t.domains(),
                                           std::vector<std::size_t>(t.arity(), SIZE_MAX), 0);
    return [=](const RunContext& ctx) {
      return check_result({check_multiple_formula(t, qs, samples(ctx.seed), ctx.tol)});
    };
  }
  if (theorem == "partition") {
    const MultiOperator t = get_operator(m, job, "operator", path).op;
    if (t.arity() != 3) fail(key_path(path, "operator"), "the partition check needs a trilinear operator");
    const double q1 = get_exponent(job, "q1", path);
    const double q2 = get_exponent(job, "q2", path);
    const ClassStack stack =
        job.contains("stack") ? get_classes(m, job, "stack", path) : partition_stack(q1, q2);
    check_stack_arity(stack, 3, path, "stack");
    require_supported(stack);
    const SampleFn samples =
        sample_source(job, path, t.domains(), std::vector<std::size_t>(3, SIZE_MAX), 0);
    return [=](const RunContext& ctx) {
      return check_result({check_partition_formula(t, stack, q1, q2, samples(ctx.seed), ctx.tol)});
    };
  }
  if (theorem == "coincidence") {
    const MultiOperator a = get_operator(m, job, "operator", path).op;
    if (a.arity() != 2) fail(key_path(path, "operator"), "the coincidence check needs a bilinear operator");
    const auto xs = get_classes(m, job, "x", path);
    check_stack_arity(xs, 2, path, "x");
    const double q = get_exponent(job, "q", path);
    std::optional<CoincidenceConstants> constants;
    if (job.contains("constants")) {
      const std::string cp = key_path(path, "constants");
      const json& c = job["constants"];
      constants = CoincidenceConstants{get_number(c, "c1", cp), get_number(c, "c2", cp)};
      if (!(constants->c1 > 0.0 && constants->c2 > 0.0)) fail(cp, "constants must be positive");
    } else if (!(xs[0] == ClassSpec::strong(1.0) && xs[1] == ClassSpec::strong(1.0) && q == 1.0)) {
      fail(path, "coincidence check refused: only x = [strong(1), strong(1)] with q = 1 has "
                 "built-in constants; assert \"constants\": {\"c1\": ..., \"c2\": ...}");
    }
    const SampleFn samples = sample_source(job, path, a.domains(), {SIZE_MAX, SIZE_MAX}, 1);
    return [=](const RunContext& ctx) {
      return check_result(
          {check_coincidence(a, xs, q, constants, samples(ctx.seed), {ctx.budget, ctx.seed}, ctx.tol)});
    };
  }
  if (theorem == "diagonalizable") {
    const ClassSpec y = get_class(job, "y", path);
    const ClassSpec z = get_class(job, "z", path);
    require_supported({y, z});
    const LpSpace space = resolve_space(m, require_field(job, "space", path), key_path(path, "space"));
    const SampleFn samples = sample_source(job, path, {space}, {SIZE_MAX}, 1);
    return [=](const RunContext& ctx) {
      std::vector<VecSequence> seqs;
      for (auto& tuple : samples(ctx.seed)) seqs.push_back(tuple.front());
      const DiagonalizabilityReport d =
          check_diagonalizable(y, z, space, seqs, {ctx.budget, ctx.seed}, ctx.tol.identity);
      JobResult r;
      r.is_check = true;
      r.pass = d.pass;
      r.result = {{"checks", json::array({{{"check", "diagonalizable"},
                                           {"pass", d.pass},
                                           {"instances", d.samples},
                                           {"worst_slack", d.worst_deviation},
                                           {"exact", d.exact}}})}};
      return r;
    };
  }
  fail(key_path(path, "theorem"),
       "unknown theorem \"" + theorem +
           "\"; known: finite-type, compatibility, norm-domination, ideal, diagonal, multiple, "
           "partition, coincidence, diagonalizable");
}

JobFn prepare_job(const Model& m, const json& job, const std::string& path, std::string& command) {
  if (!job.is_object()) fail(path, "expected a job object");
  const json& c = require_field(job, "command", path);
  if (!c.is_string()) fail(key_path(path, "command"), "expected a string");
  command = c.get<std::string>();
  if (job.contains("seed") && !job["seed"].is_number_unsigned()) {
    fail(key_path(path, "seed"), "expected a nonnegative integer");
  }
  if (job.contains("budget") && !job["budget"].is_number_unsigned()) {
    fail(key_path(path, "budget"), "expected a nonnegative integer");
  }
  try {
    if (command == "norm") return prepare_norm(m, job, path);
    if (command == "summing-norm") return prepare_summing(m, job, path);
    if (command == "witness") return prepare_witness(m, job, path);
    if (command == "check") return prepare_check(m, job, path);
  } catch (const UnsupportedClassPosition& e) {
    fail(path, std::string("UnsupportedClassPosition: ") + e.what());
  } catch (const NonvoidViolation& e) {
    fail(path, std::string("NonvoidViolation: ") + e.what());
  }
  fail(key_path(path, "command"),
       "unknown command \"" + command + "\"; expected norm, summing-norm, check or witness");
}

struct Prepared {
  Model model;
  std::vector<PreparedJob> jobs;
};

Prepared prepare(const json& config, const fs::path& base, std::vector<Diagnostic>& diags) {
  if (!config.is_object()) {
    diags.push_back({"$", "expected a JSON object"});
    return {};
  }
  Prepared p{build_model(config, base, diags), {}};
  if (!config.contains("jobs")) {
    diags.push_back({"$", "missing field \"jobs\""});
    return p;
  }
  if (!config["jobs"].is_array()) {
    diags.push_back({"$.jobs", "expected an array"});
    return p;
  }
  for (std::size_t i = 0; i < config["jobs"].size(); ++i) {
    const std::string path = index_path("$.jobs", i);
    const json& job = config["jobs"][i];
    std::string command;
    try {
      JobFn fn = prepare_job(p.model, job, path, command);
      p.jobs.push_back({i, command, job, std::move(fn)});
    } catch (const Error& e) {
      diags.push_back(diagnostic_from(e, path));
    }
  }
  return p;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<Diagnostic> validate(const json& config, const fs::path& base_dir) {
  std::vector<Diagnostic> diags;
  prepare(config, base_dir, diags);
  return diags;
}

Outcome execute(const std::string& command, const json& config, const Settings& settings,
                std::size_t parallelism, const fs::path& base_dir) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  json& report = out.report;
  report["tool"] = "blocknorm";
  report["version"] = version();
  report["command"] = command;
  report["settings"] = {{"seed", settings.seed},
                        {"budget", settings.budget},
                        {"tol_identity", settings.tol.identity},
                        {"tol_chain", settings.tol.chain}};
  const auto& known = commands();
  if (std::find(known.begin(), known.end(), command) == known.end()) {
    report["valid"] = false;
    report["diagnostics"] = json::array({to_json(Diagnostic{"", "unknown command \"" + command + "\""})});
    out.exit_code = kExitConfigError;
    return out;
  }

  std::vector<Diagnostic> diags;
  Prepared prepared = prepare(config, base_dir, diags);
  json diag_json = json::array();
  for (const Diagnostic& d : diags) diag_json.push_back(to_json(d));
  report["valid"] = diags.empty();
  report["diagnostics"] = diag_json;
  if (config.is_object()) {
    json echo = prepared.model.echo;
    echo["settings"] = report["settings"];
    report["config"] = echo;
  }
  if (!diags.empty()) {
    out.exit_code = kExitConfigError;
    report["elapsed_ms"] = elapsed_ms(start);
    return out;
  }
  if (command == "validate") {
    report["elapsed_ms"] = elapsed_ms(start);
    return out;
  }

  std::vector<const PreparedJob*> selected;
  for (const PreparedJob& job : prepared.jobs) {
    if (command == "run" || job.command == command) selected.push_back(&job);
  }
  std::vector<json> records(selected.size());
  std::vector<int> codes(selected.size(), kExitPass);

  auto run_one = [&](std::size_t slot) {
    const PreparedJob& job = *selected[slot];
    const auto job_start = std::chrono::steady_clock::now();
    RunContext ctx{job.job.contains("seed") ? job.job["seed"].get<std::uint64_t>()
                                            : derive_seed(settings.seed, {job.index}),
                   job.job.contains("budget") ? job.job["budget"].get<std::size_t>() : settings.budget,
                   settings.tol};
    json rec = {{"index", job.index}, {"command", job.command}, {"seed", ctx.seed},
                {"budget", ctx.budget}};
    if (job.job.contains("name")) rec["name"] = job.job["name"];
    try {
      JobResult r = job.run(ctx);
      rec["status"] = "ok";
      if (r.is_check) rec["pass"] = r.pass;
      rec["result"] = std::move(r.result);
      if (!r.pass) codes[slot] = kExitCheckFailure;
    } catch (const InputError& e) {
      rec["status"] = "error";
      rec["error"] = e.what();
      codes[slot] = kExitConfigError;
    } catch (const std::exception& e) {
      rec["status"] = "internal-error";
      rec["error"] = e.what();
      codes[slot] = kExitInternalFailure;
    }
    rec["elapsed_ms"] = elapsed_ms(job_start);
    records[slot] = std::move(rec);
  };

  const std::size_t workers = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(1, selected.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < selected.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < selected.size(); i = next++) run_one(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  bool pass = true;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    out.exit_code = std::max(out.exit_code, codes[i]);
    pass = pass && codes[i] == kExitPass;
  }
  report["jobs"] = records;
  report["pass"] = pass;
  report["exit_code"] = out.exit_code;
  report["elapsed_ms"] = elapsed_ms(start);
  return out;
}

}  // namespace blocknorm::cli
