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

#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "mmrs/io.hpp"
#include "mmrs/simgen.hpp"

using namespace mmrs;
using fixtures::schema;

TEST_CASE("schema files") {
  const auto s = io::parse_schema("# demo\np1 = 1\np2=0\nd1 = 2\nuser_cardinalities = 3, 4\nitem_cardinalities = 5\nT = 2\n");
  CHECK(s == schema(1, 0, {3, 4}, {5}, 2));
  CHECK(io::parse_schema(io::format_schema(s)) == s);
  CHECK_THROWS_AS(io::parse_schema("p1 = 1\np2 = 0\nT = 2\nd1 = 1\nuser_cardinalities = 3,4\nitem_cardinalities = 1\n"),
                  Error);
  CHECK_THROWS_AS(io::parse_schema("p1 = x\n"), Error);
  CHECK_THROWS_AS(io::parse_schema("p1 = 1\np2 = 1\n"), Error);
  try {
    io::parse_schema("colour = 3\n");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMalformedFile);
  }
}

TEST_CASE("csv round trip") {
  std::mt19937_64 rng(1);
  const auto ds = fixtures::random_dataset(rng, schema(2, 1, {3}, {2, 2}, 3), 4, 5, 0.8);
  const auto dir = fixtures::temp_dir("csv");
  io::save_dataset(dir, ds);
  const auto back = io::load_dataset(io::DatasetFiles::in(dir));
  CHECK(back.labeled);
  const auto& b = back.dataset;
  REQUIRE(b.size() == ds.size());
  CHECK(b.schema() == ds.schema());
  CHECK(b.users().numeric == ds.users().numeric);
  CHECK(b.items().levels == ds.items().levels);
  for (Index k = 0; k < ds.size(); ++k) CHECK(b.interactions()[k].y == ds.interactions()[k].y);
  CHECK(io::format_interactions(b) == io::format_interactions(ds));
}

TEST_CASE("malformed inputs are rejected") {
  const std::vector<int> cards{2};
  auto kind_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  CHECK(kind_of([&] { io::parse_feature_table("i,u1,s1\n1,1.5,1\n", 1, cards, 'u', 's', "i"); }) ==
        ErrorKind::kMalformedFile);
  CHECK(kind_of([&] { io::parse_feature_table("i,u1,s1\n1,0.5,3\n", 1, cards, 'u', 's', "i"); }) ==
        ErrorKind::kMalformedFile);
  CHECK(kind_of([&] { io::parse_feature_table("i,s1\n1,1\n", 1, cards, 'u', 's', "i"); }) ==
        ErrorKind::kMalformedFile);
  CHECK(kind_of([&] { io::parse_feature_table("i,u1,s1\n1,0.5,1\n1,0.2,2\n", 1, cards, 'u', 's', "i"); }) ==
        ErrorKind::kMalformedFile);
  CHECK(kind_of([&] { io::parse_interactions("i,j,y1\n1,2,0\n", 1); }) == ErrorKind::kMalformedFile);
  CHECK(kind_of([&] { io::parse_interactions("i,j,y1,y2\n1,2,1\n", 2); }) == ErrorKind::kMalformedFile);
  CHECK(kind_of([&] { io::parse_interactions("i,j\n1,2\n", 2); }) == ErrorKind::kMalformedFile);
  const auto unl = io::parse_interactions("i,j\n1,2\n", 2, true);
  CHECK_FALSE(unl.labeled);
  CHECK(unl.y == Eigen::MatrixXi::Ones(2, 1));
  CHECK(kind_of([] { io::read_file("/nonexistent/mmrs/file"); }) == ErrorKind::kIo);

  auto users = std::make_shared<FeatureTable>(io::parse_feature_table("i,s1\n1,1\n", 0, cards, 'u', 's', "i"));
  auto items = std::make_shared<FeatureTable>(io::parse_feature_table("j,o1\n7,2\n", 0, cards, 'v', 'o', "j"));
  const auto s = schema(0, 0, {2}, {2}, 1);
  CHECK(kind_of([&] { io::assemble_dataset(s, users, items, io::parse_interactions("i,j,y1\n1,8,1\n", 1)); }) ==
        ErrorKind::kMalformedFile);
  CHECK(kind_of([&] {
          io::assemble_dataset(s, users, items, io::parse_interactions("i,j,y1\n1,7,1\n1,7,-1\n", 1));
        }) == ErrorKind::kMalformedFile);
}

TEST_CASE("model files round trip exactly") {
  std::mt19937_64 rng(2);
  const auto s = schema(2, 1, {3, 2}, {4}, 3);
  const auto dir = fixtures::temp_dir("model");
  for (int rep = 0; rep < 5; ++rep) {
    Model p = fixtures::random_params(rng, s, 4);
    p.A(0, 0) = 0.1 + 0.2;  // not representable as a short decimal
    p.Q(1, 1) = 1e-300;
    io::save_model(dir / "m.json", p);
    const auto back = std::get<Model>(io::load_model(dir / "m.json", s));
    CHECK(back == p);
  }

  const auto ds = fixtures::random_dataset(rng, schema(0, 0, {3}, {2}, 2), 4, 3);
  const auto standard = fit_standard(ds, StageWeights::all(2), {0.1});
  io::save_model(dir / "s.json", standard);
  const auto sb = std::get<StandardModel>(io::load_model(dir / "s.json"));
  for (std::size_t i = 0; i < standard.beta.size(); ++i) CHECK(sb.beta[i] == standard.beta[i]);
  const auto ordinal = fit_ordinal(ds, StageWeights::all(2), {0.1});
  io::save_model(dir / "o.json", ordinal);
  const auto ob = std::get<OrdinalModel>(io::load_model(dir / "o.json"));
  CHECK(ob.stages[1].increments[0] == ordinal.stages[1].increments[0]);
  CHECK(io::method_of(ob) == Method::kOrdinal);
}

TEST_CASE("corrupt or mismatched model files") {
  std::mt19937_64 rng(3);
  const auto s = schema(1, 1, {3}, {2}, 2);
  const auto dir = fixtures::temp_dir("corrupt");
  io::save_model(dir / "m.json", fixtures::random_params(rng, s, 3));
  const std::string text = io::read_file(dir / "m.json");
  auto kind_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  for (std::size_t cut : {std::size_t{10}, text.size() / 2, text.size() - 3}) {
    io::write_file(dir / "t.json", text.substr(0, cut));
    CHECK(kind_of([&] { io::load_model(dir / "t.json"); }) == ErrorKind::kCorruptModel);
  }
  std::string negative = text;
  const auto pos = negative.find("\"q\"");
  const auto digit = negative.find_first_of("0123456789", negative.find("data", pos));
  negative.insert(digit, "-");
  io::write_file(dir / "n.json", negative);
  CHECK(kind_of([&] { io::load_model(dir / "n.json"); }) == ErrorKind::kCorruptModel);
  CHECK(kind_of([&] { io::load_model(dir / "m.json", schema(1, 1, {4}, {2}, 2)); }) == ErrorKind::kSchemaMismatch);
}
