#include "sheaf/spec_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "sheaf/error.hpp"

namespace sheaf {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::Parse, what); }

const json& field(const json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) bad(fmt::format("{}: missing field '{}'", where, name));
  return j.at(name);
}

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    bad(fmt::format("{}: {}", where, e.what()));
  }
}

std::size_t get_size(const json& j, const char* name, const std::string& where) {
  const json& v = field(j, name, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    bad(fmt::format("{}: '{}' must be a non-negative integer", where, name));
  return v.get<std::size_t>();
}

double get_weight(const json& j) { return j.contains("weight") ? get_as<double>(j.at("weight"), "weight") : 1.0; }

// --- spaces ---

ValueSpace parse_space(const json& j, const std::string& where) {
  if (!j.is_object()) bad(fmt::format("{}: space descriptor must be an object", where));
  const auto kind = get_as<std::string>(field(j, "kind", where), where);
  const double w = get_weight(j);
  if (kind == "euclidean") return ValueSpace::euclidean(get_size(j, "dim", where), w);
  if (kind == "simplex") return ValueSpace::simplex(get_size(j, "dim", where), w);
  if (kind == "circle") return ValueSpace::circle(w);
  if (kind == "geo2d") return ValueSpace::geo2d(w);
  if (kind == "geo3d") return ValueSpace::geo3d(w);
  if (kind == "time") return ValueSpace::time(w);
  if (kind == "discrete")
    return ValueSpace::discrete(get_as<std::vector<std::string>>(field(j, "labels", where), where), w);
  if (kind == "product") {
    const json& f = field(j, "factors", where);
    if (!f.is_array()) bad(fmt::format("{}: 'factors' must be an array", where));
    std::vector<ValueSpace> factors;
    for (const auto& x : f) factors.push_back(parse_space(x, where));
    return ValueSpace::product(factors, w);
  }
  bad(fmt::format("{}: unknown space kind '{}'", where, kind));
}

json component_json(const SpaceComponent& c) {
  json j;
  j["kind"] = std::string(to_string(c.kind));
  if (c.kind == SpaceKind::Euclidean || c.kind == SpaceKind::Simplex) j["dim"] = c.dim;
  if (c.kind == SpaceKind::Discrete) j["labels"] = c.labels;
  if (c.weight != 1.0) j["weight"] = c.weight;
  return j;
}

json space_json(const ValueSpace& s) {
  if (s.components().size() == 1) return component_json(s.components()[0]);
  json factors = json::array();
  for (const auto& c : s.components()) factors.push_back(component_json(c));
  return {{"kind", "product"}, {"factors", factors}};
}

// --- maps ---

Matrix parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array()) bad(fmt::format("{}: matrix must be an array of rows", where));
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  for (const auto& r : j) {
    if (!r.is_array()) bad(fmt::format("{}: matrix row must be an array", where));
    if (cols >= 0 && static_cast<Eigen::Index>(r.size()) != cols)
      bad(fmt::format("{}: ragged matrix", where));
    cols = static_cast<Eigen::Index>(r.size());
  }
  Matrix m(rows, std::max<Eigen::Index>(cols, 0));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k)
      m(i, k) = get_as<double>(j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)], where);
  return m;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(std::move(r));
  }
  return rows;
}

RestrictionMap parse_map(const std::string& kind, const json& p, const std::string& where) {
  if (kind == "identity") return RestrictionMap::identity(get_size(p, "dim", where));
  if (kind == "projection")
    return RestrictionMap::projection(get_as<std::vector<std::size_t>>(field(p, "indices", where), where),
                                      get_size(p, "in_dim", where));
  if (kind == "linear") return RestrictionMap::linear(parse_matrix(field(p, "matrix", where), where));
  if (kind == "sparse") {
    const auto rows = static_cast<Eigen::Index>(get_size(p, "rows", where));
    const auto cols = static_cast<Eigen::Index>(get_size(p, "cols", where));
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& e : field(p, "entries", where)) {
      if (!e.is_array() || e.size() != 3) bad(fmt::format("{}: sparse entry must be [i, j, v]", where));
      auto i = get_as<Eigen::Index>(e[0], where), k = get_as<Eigen::Index>(e[1], where);
      if (i < 0 || k < 0 || i >= rows || k >= cols) bad(fmt::format("{}: sparse entry out of range", where));
      trip.emplace_back(i, k, get_as<double>(e[2], where));
    }
    SparseMatrix m(rows, cols);
    m.setFromTriplets(trip.begin(), trip.end());
    return RestrictionMap::sparse(std::move(m));
  }
  if (kind == "affine") {
    auto off = get_as<std::vector<double>>(field(p, "offset", where), where);
    return RestrictionMap::affine(parse_matrix(field(p, "matrix", where), where),
                                  Eigen::Map<Vec>(off.data(), static_cast<Eigen::Index>(off.size())));
  }
  if (kind == "builtin") {
    Params params;
    if (p.contains("params")) params = get_as<Params>(p.at("params"), where);
    return RestrictionMap::builtin(get_as<std::string>(field(p, "name", where), where), std::move(params));
  }
  auto nested = [&](const json& j) {
    return parse_map(get_as<std::string>(field(j, "kind", where), where),
                     j.contains("payload") ? j.at("payload") : json::object(), where);
  };
  if (kind == "composite") {
    std::vector<RestrictionMap> parts;
    for (const auto& x : field(p, "parts", where)) parts.push_back(nested(x));
    return RestrictionMap::composite(std::move(parts));
  }
  if (kind == "blocks") {
    std::vector<RestrictionMap::Block> blocks;
    for (const auto& b : field(p, "blocks", where))
      blocks.push_back({get_size(b, "offset", where), get_size(b, "length", where),
                        std::make_shared<RestrictionMap>(nested(field(b, "map", where)))});
    return RestrictionMap::blocks(get_size(p, "in_dim", where), std::move(blocks));
  }
  bad(fmt::format("{}: unknown restriction kind '{}'", where, kind));
}

std::pair<std::string, json> map_json(const RestrictionMap& m) {
  using K = RestrictionMap::Kind;
  switch (m.kind()) {
    case K::Identity: return {"identity", {{"dim", m.in_dim()}}};
    case K::Projection: return {"projection", {{"indices", m.indices()}, {"in_dim", m.in_dim()}}};
    case K::Linear: return {"linear", {{"matrix", matrix_json(m.dense())}}};
    case K::Sparse: {
      SparseMatrix s = m.sparse_matrix();
      json entries = json::array();
      for (int k = 0; k < s.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(s, k); it; ++it)
          entries.push_back({it.row(), it.col(), it.value()});
      return {"sparse", {{"rows", s.rows()}, {"cols", s.cols()}, {"entries", entries}}};
    }
    case K::Affine: {
      const Vec& o = m.offset();
      return {"affine",
              {{"matrix", matrix_json(m.dense())}, {"offset", std::vector<double>(o.data(), o.data() + o.size())}}};
    }
    case K::Builtin: return {"builtin", {{"name", m.builtin_name()}, {"params", m.params()}}};
    case K::Composite: {
      json parts = json::array();
      for (const auto& p : m.parts()) {
        auto [k, pl] = map_json(p);
        parts.push_back({{"kind", k}, {"payload", pl}});
      }
      return {"composite", {{"parts", parts}}};
    }
    case K::Blocks: {
      json blocks = json::array();
      for (const auto& b : m.block_list()) {
        auto [k, pl] = map_json(*b.map);
        blocks.push_back({{"offset", b.offset}, {"length", b.length}, {"map", {{"kind", k}, {"payload", pl}}}});
      }
      return {"blocks", {{"in_dim", m.in_dim()}, {"blocks", blocks}}};
    }
  }
  return {"identity", {{"dim", 0}}};
}

}  // namespace

Sheaf SheafSpec::build() const { return complete_unions(partial); }

std::vector<OpenId> SheafSpec::default_cover() const {
  const Topology& t = partial.topology;
  std::vector<OpenId> cover;
  if (auto it = covers.find("default"); it != covers.end()) {
    for (const auto& k : it->second) cover.push_back(t.find_key(k));
  } else {
    for (EntityMask m : t.subbase())
      if (m) cover.push_back(*t.find(m));
  }
  return cover;
}

SheafSpec parse_sheaf_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(fmt::format("invalid JSON: {}", e.what()));
  }
  if (!j.is_object()) bad("spec must be a JSON object");
  auto entities = get_as<std::vector<std::string>>(field(j, "entities", "spec"), "entities");
  auto subbase = get_as<std::vector<std::vector<std::string>>>(field(j, "subbase", "spec"), "subbase");

  SheafSpec spec;
  spec.partial = PartialSheaf(generate_topology(EntityUniverse(std::move(entities)), subbase));
  const json& stalks = field(j, "stalks", "spec");
  if (!stalks.is_object()) bad("'stalks' must be an object keyed by open set");
  for (const auto& [key, desc] : stalks.items())
    spec.partial.stalk(key, parse_space(desc, fmt::format("stalk '{}'", key)));

  const json& rs = field(j, "restrictions", "spec");
  if (!rs.is_array()) bad("'restrictions' must be an array");
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const std::string where = fmt::format("restriction #{}", i);
    const json& r = rs[i];
    auto from = get_as<std::string>(field(r, "from", where), where);
    auto to = get_as<std::string>(field(r, "to", where), where);
    auto kind = get_as<std::string>(field(r, "kind", where), where);
    const json payload = r.contains("payload") ? r.at("payload") : json::object();
    spec.partial.restriction(from, to, parse_map(kind, payload, fmt::format("{} ({} -> {})", where, from, to)));
  }
  if (j.contains("weights")) spec.weights = get_as<std::map<std::string, double>>(j.at("weights"), "weights");
  if (j.contains("lift_box")) {
    for (const auto& b : j.at("lift_box")) {
      auto v = get_as<std::vector<double>>(b, "lift_box");
      if (v.size() != 2 || !(v[0] < v[1])) bad("lift_box entries must be [lo, hi] with lo < hi");
      spec.lift_box.emplace_back(v[0], v[1]);
    }
  }
  if (j.contains("covers"))
    spec.covers = get_as<std::map<std::string, std::vector<std::string>>>(j.at("covers"), "covers");
  for (const auto& [name, keys] : spec.covers)
    for (const auto& k : keys) spec.partial.topology.find_key(k);
  return spec;
}

SheafSpec load_sheaf_spec(const std::string& path) { return parse_sheaf_spec(read_file(path)); }

std::string dump_sheaf_spec(const SheafSpec& spec) {
  const Topology& t = spec.partial.topology;
  const EntityUniverse& u = t.universe();
  json j;
  j["entities"] = u.names();
  json subbase = json::array();
  for (EntityMask m : t.subbase()) subbase.push_back(u.names_in(m));
  j["subbase"] = subbase;
  json stalks = json::object();
  for (const auto& [id, space] : spec.partial.stalks) stalks[t.key(id)] = space_json(space);
  j["stalks"] = stalks;
  json rs = json::array();
  for (const auto& r : spec.partial.restrictions) {
    auto [kind, payload] = map_json(r.map);
    rs.push_back({{"from", t.key(r.from)}, {"to", t.key(r.to)}, {"kind", kind}, {"payload", payload}});
  }
  j["restrictions"] = rs;
  if (!spec.weights.empty()) j["weights"] = spec.weights;
  if (!spec.lift_box.empty()) {
    json box = json::array();
    for (auto [lo, hi] : spec.lift_box) box.push_back({lo, hi});
    j["lift_box"] = box;
  }
  if (!spec.covers.empty()) j["covers"] = spec.covers;
  return j.dump(2) + "\n";
}

SheafSpec spec_of(const Sheaf& sheaf) {
  SheafSpec s;
  s.partial = sheaf.declaration();
  return s;
}

// --- CSV ---------------------------------------------------------------------

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

namespace {

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    bad(fmt::format("line {}: '{}' is not a number", line, s));
  }
}

}  // namespace

Assignment parse_assignment_csv(std::shared_ptr<const Sheaf> sheaf, std::string_view text) {
  Assignment a(sheaf);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto cells = split_csv(line);
    if (cells.size() == 1 && cells[0].empty()) continue;
    if (!header) {
      if (cells[0] != "open_set") bad("assignment CSV must start with an 'open_set,c0,...' header");
      header = true;
      continue;
    }
    const std::string& key = cells[0];
    OpenId id;
    try {
      id = sheaf->topology().find_key(key);
    } catch (const Error& e) {
      bad(fmt::format("line {}: unknown open set '{}'", lineno, key));
    }
    while (cells.size() > 1 && cells.back().empty()) cells.pop_back();
    const std::size_t n = cells.size() - 1;
    if (n != sheaf->dim(id))
      bad(fmt::format("line {}: open set '{}' has {} values, its stalk has {} coordinates", lineno, key, n,
                      sheaf->dim(id)));
    if (a.defined(id)) bad(fmt::format("line {}: open set '{}' assigned twice", lineno, key));
    Vec v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = parse_double(cells[i + 1], lineno);
    try {
      a.set(id, std::move(v));
    } catch (const Error& e) {
      bad(fmt::format("line {}: {}", lineno, e.what()));
    }
  }
  if (!header) bad("assignment CSV is empty");
  return a;
}

Assignment load_assignment_csv(std::shared_ptr<const Sheaf> sheaf, const std::string& path) {
  return parse_assignment_csv(std::move(sheaf), read_file(path));
}

std::string dump_assignment_csv(const Assignment& a) {
  std::size_t width = 0;
  for (OpenId id : a.domain()) width = std::max<std::size_t>(width, static_cast<std::size_t>(a.at(id).size()));
  std::string out = "open_set";
  for (std::size_t i = 0; i < width; ++i) out += fmt::format(",c{}", i);
  out += "\n";
  for (OpenId id : a.domain()) {
    out += a.sheaf().topology().key(id);
    for (double v : a.at(id)) out += "," + format_number(v);
    out += "\n";
  }
  return out;
}

std::string dump_radius_csv(const Sheaf& sheaf, const RadiusReport& report) {
  std::string out = "smaller,larger,error_km\n";
  for (const auto& e : report.edges)
    out += fmt::format("{},{},{}\n", sheaf.topology().key(e.smaller), sheaf.topology().key(e.larger),
                       format_number(e.error));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Parse, fmt::format("cannot read '{}'", path));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, fmt::format("cannot write '{}'", path));
  f << contents;
}

}  // namespace sheaf
