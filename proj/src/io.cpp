// Copyright 2026 The mmrs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mmrs/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace mmrs::io {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::kMalformedFile, where + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Non-empty, non-comment lines with their 1-based line numbers.
std::vector<std::pair<int, std::string_view>> lines_of(const std::string& text) {
  std::vector<std::pair<int, std::string_view>> out;
  std::string_view rest(text);
  int no = 0;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    auto line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view() : rest.substr(nl + 1);
    ++no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    out.emplace_back(no, line);
  }
  return out;
}

std::string where(const std::string& what, int line) { return what + " line " + std::to_string(line); }

std::string format_double(double v) {
  // Shortest representation that reads back to the same double.
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}

void expect_header(const std::vector<std::string_view>& got, const std::vector<std::string>& want,
                   const std::string& file) {
  bool ok = got.size() == want.size();
  for (std::size_t c = 0; ok && c < want.size(); ++c) ok = got[c] == want[c];
  if (!ok) {
    std::string w;
    for (const auto& s : want) w += (w.empty() ? "" : ",") + s;
    malformed(file, "expected header " + w);
  }
}

json matrix_json(const MatXd& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

MatXd matrix_from(const json& j, Index rows, Index cols, const std::string& name) {
  auto corrupt = [&](const std::string& what) { throw Error(ErrorKind::kCorruptModel, "model block " + name + ": " + what); };
  if (!j.is_object() || j.value("rows", Index(-1)) != rows || j.value("cols", Index(-1)) != cols)
    corrupt("wrong shape");
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<Index>(data.size()) != rows) corrupt("wrong row count");
  MatXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = data[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) corrupt("wrong column count");
    for (Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) corrupt("non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json vector_json(const VecXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

VecXd vector_from(const json& j, Index size, const std::string& name) {
  if (!j.is_array() || (size >= 0 && static_cast<Index>(j.size()) != size))
    throw Error(ErrorKind::kCorruptModel, "model block " + name + ": wrong length");
  VecXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::kCorruptModel, "model block " + name + ": non-numeric entry");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

json schema_json(const FeatureSchema& s) {
  return {{"p1", s.p1},
          {"p2", s.p2},
          {"user_cardinalities", s.user_cardinalities},
          {"item_cardinalities", s.item_cardinalities},
          {"T", s.stages}};
}

FeatureSchema schema_from(const json& j) {
  FeatureSchema s;
  s.p1 = j.at("p1").get<int>();
  s.p2 = j.at("p2").get<int>();
  s.user_cardinalities = j.at("user_cardinalities").get<std::vector<int>>();
  s.item_cardinalities = j.at("item_cardinalities").get<std::vector<int>>();
  s.stages = j.at("T").get<int>();
  s.validate();
  return s;
}

constexpr const char* kFormat = "mmrs-model";
constexpr int kVersion = 1;

}  // namespace

FeatureSchema parse_schema(const std::string& text) {
  FeatureSchema s;
  std::optional<int> d1, d2;
  std::unordered_set<std::string> seen;
  auto ints = [](std::string_view v, int line) {
    std::vector<int> out;
    if (v.empty()) return out;
    for (auto part : split(v, ',')) {
      auto n = parse_number<int>(part);
      if (!n) malformed(where("schema", line), "expected an integer list");
      out.push_back(*n);
    }
    return out;
  };
  for (const auto& [no, line] : lines_of(text)) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) malformed(where("schema", no), "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) malformed(where("schema", no), "duplicate key " + key);
    auto one = [&] {
      auto n = parse_number<int>(value);
      if (!n) malformed(where("schema", no), key + " must be an integer");
      return *n;
    };
    if (key == "p1") s.p1 = one();
    else if (key == "p2") s.p2 = one();
    else if (key == "d1") d1 = one();
    else if (key == "d2") d2 = one();
    else if (key == "T") s.stages = one();
    else if (key == "user_cardinalities") s.user_cardinalities = ints(value, no);
    else if (key == "item_cardinalities") s.item_cardinalities = ints(value, no);
    else malformed(where("schema", no), "unknown key " + key);
  }
  for (const char* k : {"p1", "p2", "T"})
    if (!seen.count(k)) malformed("schema", std::string("missing key ") + k);
  if (d1 && *d1 != s.d1()) malformed("schema", "d1 does not match user_cardinalities");
  if (d2 && *d2 != s.d2()) malformed("schema", "d2 does not match item_cardinalities");
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kMalformedFile, e.what());
  }
  return s;
}

std::string format_schema(const FeatureSchema& s) {
  auto list = [](const std::vector<int>& v) {
    std::string out;
    for (int x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
    return out;
  };
  std::ostringstream os;
  os << "p1 = " << s.p1 << "\np2 = " << s.p2 << "\nd1 = " << s.d1() << "\nd2 = " << s.d2()
     << "\nuser_cardinalities = " << list(s.user_cardinalities)
     << "\nitem_cardinalities = " << list(s.item_cardinalities) << "\nT = " << s.stages << '\n';
  return os.str();
}

FeatureSchema read_schema(const fs::path& path) { return parse_schema(read_file(path)); }

FeatureTable parse_feature_table(const std::string& text, int numeric_dim, const std::vector<int>& cardinalities,
                                 char prefix_numeric, char prefix_level, const std::string& id_name) {
  const std::string file = id_name == "i" ? "users" : "items";
  const auto lines = lines_of(text);
  if (lines.empty()) malformed(file, "missing header");
  std::vector<std::string> header{id_name};
  for (int c = 1; c <= numeric_dim; ++c) header.push_back(prefix_numeric + std::to_string(c));
  for (std::size_t l = 1; l <= cardinalities.size(); ++l) header.push_back(prefix_level + std::to_string(l));
  expect_header(split(lines.front().second, ','), header, file);

  const auto d = static_cast<Index>(cardinalities.size());
  const auto n = static_cast<Index>(lines.size() - 1);
  FeatureTable t;
  t.numeric.resize(numeric_dim, n);
  t.levels.resize(d, n);
  for (Index r = 0; r < n; ++r) {
    const auto& [no, line] = lines[static_cast<std::size_t>(r + 1)];
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) malformed(where(file, no), "wrong number of fields");
    auto id = parse_number<std::int64_t>(cells[0]);
    if (!id) malformed(where(file, no), "bad id");
    t.ids.push_back(*id);
    for (int c = 0; c < numeric_dim; ++c) {
      auto v = parse_number<double>(cells[1 + c]);
      if (!v) malformed(where(file, no), "bad numeric feature");
      if (!(*v >= 0.0 && *v <= 1.0)) malformed(where(file, no), "numeric feature outside [0,1]");
      t.numeric(c, r) = *v;
    }
    for (Index l = 0; l < d; ++l) {
      auto v = parse_number<int>(cells[1 + numeric_dim + l]);
      if (!v || *v < 1 || *v > cardinalities[l]) malformed(where(file, no), "category level out of range");
      t.levels(l, r) = *v - 1;
    }
  }
  try {
    t.finalize(numeric_dim, cardinalities);
  } catch (const Error& e) {
    throw Error(ErrorKind::kMalformedFile, file + ": " + e.what());
  }
  return t;
}

std::string format_feature_table(const FeatureTable& t, char prefix_numeric, char prefix_level,
                                 const std::string& id_name) {
  std::ostringstream os;
  os << id_name;
  for (Index c = 1; c <= t.numeric.rows(); ++c) os << ',' << prefix_numeric << c;
  for (Index l = 1; l <= t.levels.rows(); ++l) os << ',' << prefix_level << l;
  os << '\n';
  for (Index r = 0; r < t.rows(); ++r) {
    os << t.ids[r];
    for (Index c = 0; c < t.numeric.rows(); ++c) os << ',' << format_double(t.numeric(c, r));
    for (Index l = 0; l < t.levels.rows(); ++l) os << ',' << t.levels(l, r) + 1;
    os << '\n';
  }
  return os.str();
}

InteractionRows parse_interactions(const std::string& text, int stages, bool allow_unlabeled) {
  const auto lines = lines_of(text);
  if (lines.empty()) malformed("interactions", "missing header");
  const auto head = split(lines.front().second, ',');
  InteractionRows rows;
  rows.labeled = !(allow_unlabeled && head.size() == 2);
  std::vector<std::string> header{"i", "j"};
  if (rows.labeled)
    for (int t = 1; t <= stages; ++t) header.push_back("y" + std::to_string(t));
  expect_header(head, header, "interactions");

  const auto n = static_cast<Index>(lines.size() - 1);
  rows.y = Eigen::MatrixXi::Ones(stages, n);
  for (Index r = 0; r < n; ++r) {
    const auto& [no, line] = lines[static_cast<std::size_t>(r + 1)];
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) malformed(where("interactions", no), "wrong number of fields");
    auto i = parse_number<std::int64_t>(cells[0]);
    auto j = parse_number<std::int64_t>(cells[1]);
    if (!i || !j) malformed(where("interactions", no), "bad user or item id");
    rows.users.push_back(*i);
    rows.items.push_back(*j);
    if (!rows.labeled) continue;
    for (int t = 0; t < stages; ++t) {
      const auto cell = cells[2 + t];
      if (cell == "1") rows.y(t, r) = 1;
      else if (cell == "-1") rows.y(t, r) = -1;
      else malformed(where("interactions", no), "labels must be exactly 1 or -1");
    }
  }
  return rows;
}

std::string format_interactions(const Dataset& ds) {
  std::ostringstream os;
  os << "i,j";
  for (int t = 1; t <= ds.stages(); ++t) os << ",y" << t;
  os << '\n';
  for (const auto& it : ds.interactions()) {
    os << ds.users().ids[it.user] << ',' << ds.items().ids[it.item];
    for (Index t = 0; t < it.y.size(); ++t) os << ',' << it.y(t);
    os << '\n';
  }
  return os.str();
}

Dataset assemble_dataset(const FeatureSchema& schema, std::shared_ptr<const FeatureTable> users,
                         std::shared_ptr<const FeatureTable> items, const InteractionRows& rows) {
  std::vector<Interaction> xs(rows.users.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    auto u = users->find(rows.users[k]);
    auto v = items->find(rows.items[k]);
    if (!u) malformed("interactions", "unknown user id " + std::to_string(rows.users[k]));
    if (!v) malformed("interactions", "unknown item id " + std::to_string(rows.items[k]));
    xs[k].user = *u;
    xs[k].item = *v;
    xs[k].y = rows.y.col(static_cast<Index>(k));
  }
  try {
    return Dataset(schema, std::move(users), std::move(items), std::move(xs));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidArgument) throw Error(ErrorKind::kMalformedFile, e.what());
    throw;
  }
}

DatasetFiles DatasetFiles::in(const fs::path& dir) {
  return {dir / "schema.cfg", dir / "users.csv", dir / "items.csv", dir / "interactions.csv"};
}

LoadedDataset load_dataset(const DatasetFiles& files, bool allow_unlabeled) {
  const FeatureSchema schema = read_schema(files.schema);
  auto users = std::make_shared<FeatureTable>(
      parse_feature_table(read_file(files.users), schema.p1, schema.user_cardinalities, 'u', 's', "i"));
  auto items = std::make_shared<FeatureTable>(
      parse_feature_table(read_file(files.items), schema.p2, schema.item_cardinalities, 'v', 'o', "j"));
  const auto rows = parse_interactions(read_file(files.interactions), schema.stages, allow_unlabeled);
  return {assemble_dataset(schema, users, items, rows), rows.labeled};
}

void save_dataset(const fs::path& dir, const Dataset& ds) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
  const auto files = DatasetFiles::in(dir);
  write_file(files.schema, format_schema(ds.schema()));
  write_file(files.users, format_feature_table(ds.users(), 'u', 's', "i"));
  write_file(files.items, format_feature_table(ds.items(), 'v', 'o', "j"));
  write_file(files.interactions, format_interactions(ds));
}

Method method_of(const AnyModel& model) {
  return static_cast<Method>(model.index());
}

const FeatureSchema& schema_of(const AnyModel& model) {
  return std::visit([](const auto& m) -> const FeatureSchema& { return m.schema; }, model);
}

std::string model_to_json(const AnyModel& any) {
  json doc = {{"format", kFormat}, {"version", kVersion}, {"method", to_string(method_of(any))},
              {"schema", schema_json(schema_of(any))}};
  if (const auto* m = std::get_if<Model>(&any)) {
    doc["K"] = m->K;
    doc["A"] = matrix_json(m->A);
    doc["B"] = matrix_json(m->B);
    json a = json::array(), b = json::array();
    for (const auto& f : m->user_factors) a.push_back(matrix_json(f));
    for (const auto& f : m->item_factors) b.push_back(matrix_json(f));
    doc["user_factors"] = std::move(a);
    doc["item_factors"] = std::move(b);
    doc["q"] = matrix_json(m->Q);
  } else if (const auto* s = std::get_if<StandardModel>(&any)) {
    json pairs = json::array();
    for (std::size_t i = 0; i < s->beta.size(); ++i)
      pairs.push_back({{"lambda", s->lambdas[i]}, {"beta", vector_json(s->beta[i])}});
    doc["pairs"] = std::move(pairs);
  } else {
    const auto& o = std::get<OrdinalModel>(any);
    json stages = json::array();
    for (const auto& st : o.stages) {
      json inc = json::array();
      for (const auto& v : st.increments) inc.push_back(vector_json(v));
      stages.push_back({{"present", st.present}, {"lambda", st.lambda}, {"base", vector_json(st.base)},
                        {"increments", std::move(inc)}});
    }
    doc["stages"] = std::move(stages);
  }
  return doc.dump(1) + "\n";
}

AnyModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kCorruptModel, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != kFormat)
      throw Error(ErrorKind::kCorruptModel, "not an mmrs model file");
    if (doc.at("version").get<int>() != kVersion)
      throw Error(ErrorKind::kCorruptModel, "unsupported model file version");
    const FeatureSchema schema = schema_from(doc.at("schema"));
    const Method method = parse_method(doc.at("method").get<std::string>());
    const Index width = schema.width();
    const int T = schema.stages;
    if (method == Method::kProposed) {
      const int K = doc.at("K").get<int>();
      if (K < 1) throw Error(ErrorKind::kCorruptModel, "K must be >= 1");
      Model m = Model::zeros(schema, K);
      m.A = matrix_from(doc.at("A"), K, schema.p1, "A");
      m.B = matrix_from(doc.at("B"), K, schema.p2, "B");
      const auto& a = doc.at("user_factors");
      const auto& b = doc.at("item_factors");
      if (!a.is_array() || static_cast<int>(a.size()) != schema.d1() || !b.is_array() ||
          static_cast<int>(b.size()) != schema.d2())
        throw Error(ErrorKind::kCorruptModel, "wrong number of factor groups");
      for (int l = 0; l < schema.d1(); ++l)
        m.user_factors[l] = matrix_from(a[l], K, schema.user_cardinalities[l], "a" + std::to_string(l + 1));
      for (int l = 0; l < schema.d2(); ++l)
        m.item_factors[l] = matrix_from(b[l], K, schema.item_cardinalities[l], "b" + std::to_string(l + 1));
      m.Q = matrix_from(doc.at("q"), K, T, "q");
      try {
        m.validate();
      } catch (const Error& e) {
        throw Error(ErrorKind::kCorruptModel, e.what());
      }
      return m;
    }
    if (method == Method::kStandard) {
      StandardModel s;
      s.schema = schema;
      const auto& pairs = doc.at("pairs");
      if (!pairs.is_array() || static_cast<int>(pairs.size()) != schema.pair_count())
        throw Error(ErrorKind::kCorruptModel, "wrong number of stage pairs");
      for (const auto& p : pairs) {
        s.lambdas.push_back(p.at("lambda").get<double>());
        VecXd beta = vector_from(p.at("beta"), -1, "beta");
        if (beta.size() != 0 && beta.size() != width) throw Error(ErrorKind::kCorruptModel, "beta has wrong width");
        s.beta.push_back(std::move(beta));
      }
      return s;
    }
    OrdinalModel o;
    o.schema = schema;
    const auto& stages = doc.at("stages");
    if (!stages.is_array() || static_cast<int>(stages.size()) != T)
      throw Error(ErrorKind::kCorruptModel, "wrong number of ordinal stages");
    for (int tp = 0; tp < T; ++tp) {
      const auto& js = stages[static_cast<std::size_t>(tp)];
      OrdinalStage st;
      st.present = js.at("present").get<int>();
      if (st.present != tp) throw Error(ErrorKind::kCorruptModel, "ordinal stages out of order");
      st.lambda = js.at("lambda").get<double>();
      st.base = vector_from(js.at("base"), -1, "base");
      const auto& inc = js.at("increments");
      if (st.base.size() != 0) {
        if (st.base.size() != width || !inc.is_array() || static_cast<int>(inc.size()) != T - tp)
          throw Error(ErrorKind::kCorruptModel, "ordinal stage has wrong shape");
        for (const auto& v : inc) {
          st.increments.push_back(vector_from(v, width, "increment"));
          if (st.increments.back().minCoeff() < 0.0)
            throw Error(ErrorKind::kCorruptModel, "ordinal increments must be nonnegative");
        }
      }
      o.stages.push_back(std::move(st));
    }
    return o;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kCorruptModel, std::string("model file is incomplete: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidArgument) throw Error(ErrorKind::kCorruptModel, e.what());
    throw;
  }
}

void save_model(const fs::path& path, const AnyModel& model) { write_file(path, model_to_json(model)); }

AnyModel load_model(const fs::path& path, const std::optional<FeatureSchema>& expected) {
  AnyModel m = model_from_json(read_file(path));
  if (expected && !(schema_of(m) == *expected))
    throw Error(ErrorKind::kSchemaMismatch, "model " + path.string() + " was saved with a different schema");
  return m;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  return os.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot write " + path.string());
  }
}

}  // namespace mmrs::io
