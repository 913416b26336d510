#include <doctest.h>

#include <random>
#include <string>

#include "mixeq/error.hpp"
#include "mixeq/network_file.hpp"
#include "support/instances.hpp"

using namespace mixeq;

namespace {

std::string data(const char* name) { return std::string(MIXEQ_TEST_DATA) + "/" + name; }

Errc parse_code(const std::string& text) {
  try {
    parse_network_json(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::io_error;
}

std::string parse_message(const std::string& text) {
  try {
    parse_network_json(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const char* kTwoLinks = R"({
  "nodes": ["S", "T"],
  "links": [
    {"id": "1", "from": "S", "to": "T", "k": 1, "b": 0},
    {"id": "2", "from": "S", "to": "T", "k": 1, "b": 1.5, "n": 1}
  ],
  "od": {"origin": "S", "destination": "T"}
})";

}  // namespace

TEST_CASE("parse a minimal document") {
  const auto doc = parse_network_json(kTwoLinks);
  CHECK(doc.network.links().size() == 2);
  CHECK(doc.network.links()[1].cost.b == 1.5);
  CHECK(doc.network.links()[0].cost.n == 1.0);
  CHECK(doc.network.demand() == 1.0);
  CHECK_FALSE(doc.paths);
  CHECK(doc.path_set().paths.size() == 2);
}

TEST_CASE("load the sample files") {
  CHECK(load_network_file(data("two_links.json")).network.links().size() == 2);
  const auto braess = load_network_file(data("braess.json"));
  REQUIRE(braess.paths);
  CHECK(braess.paths->size() == 5);
  const auto bpr = load_network_file(data("bpr_series.json"));
  CHECK(bpr.network.links()[0].cost.n == 4.0);
  CHECK(bpr.path_set().paths.size() == 4);
  try {
    load_network_file(data("missing.json"));
    FAIL("expected io_error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io_error);
  }
}

TEST_CASE("schema errors name the field") {
  std::string bad = kTwoLinks;
  bad.replace(bad.find("\"k\": 1, \"b\": 1.5"), 6, "\"k\": \"x\"");
  CHECK(parse_code(bad) == Errc::schema_error);
  CHECK(parse_message(bad).find("links[1].k") != std::string::npos);

  std::string missing = kTwoLinks;
  missing.replace(missing.find("\"from\": \"S\", "), 13, "");
  CHECK(parse_message(missing).find("links[0]") != std::string::npos);

  std::string unknown = kTwoLinks;
  unknown.replace(unknown.find("\"n\": 1"), 6, "\"capacity\": 3");
  CHECK(parse_code(unknown) == Errc::schema_error);
  CHECK(parse_message(unknown).find("capacity") != std::string::npos);

  std::string demand = kTwoLinks;
  demand.replace(demand.find("\"destination\": \"T\""), 18, "\"destination\": \"T\", \"demand\": 2");
  CHECK(parse_message(demand).find("od.demand") != std::string::npos);

  const std::string broken = "{\n  \"nodes\": [\"S\"\n  \"T\"]\n}";
  CHECK(parse_code(broken) == Errc::schema_error);
  CHECK(parse_message(broken).find("line 3") != std::string::npos);

  std::string both = kTwoLinks;
  both.replace(both.find("\"n\": 1"), 6,
               "\"bpr\": {\"t0\": 1, \"m\": 1, \"theta\": 0.15, \"beta\": 4}");
  CHECK(parse_code(both) == Errc::schema_error);
}

TEST_CASE("semantic errors keep the network codes") {
  std::string loop = kTwoLinks;
  loop.replace(loop.find("\"to\": \"T\""), 9, "\"to\": \"S\"");
  CHECK(parse_code(loop) == Errc::invalid_network);

  std::string bad_path = kTwoLinks;
  bad_path.replace(bad_path.rfind('}'), 1, ", \"paths\": [[\"9\"]]}");
  CHECK(parse_code(bad_path) == Errc::unknown_link);

  std::string negative = kTwoLinks;
  negative.replace(negative.find("\"k\": 1, \"b\": 0"), 6, "\"k\": -1");
  CHECK(parse_code(negative) == Errc::schema_error);
}

TEST_CASE("BPR links convert to polynomial form") {
  const std::string text = R"({
    "nodes": ["S", "T"],
    "links": [{"id": "a", "from": "S", "to": "T",
               "bpr": {"t0": 2, "m": 4, "theta": 0.15, "beta": 4}}],
    "od": {"origin": "S", "destination": "T", "demand": 1}
  })";
  const auto c = parse_network_json(text).network.links()[0].cost;
  CHECK(c.b == 2.0);
  CHECK(c.n == 4.0);
  CHECK(c.k == doctest::Approx(2 * 0.15 / 256));
}

TEST_CASE("property: serialize then parse is the identity") {
  std::mt19937_64 rng(113);
  testing::CostRange range;
  range.exponents = {1.0, 1.5, 2.0, 4.0};
  range.shared_exponent = false;
  for (int i = 0; i < 100; ++i) {
    const auto inst = testing::random_instance(rng, 1, 12, range);
    std::optional<std::vector<std::vector<LinkId>>> declared;
    if (i % 2) {
      declared.emplace();
      for (const auto& p : inst.paths.paths) {
        std::vector<LinkId> ids;
        for (auto l : p) ids.push_back(inst.network.links()[l].id);
        declared->push_back(ids);
      }
    }
    const std::string text = serialize_network_json(inst.network, declared);
    const auto doc = parse_network_json(text);
    REQUIRE(doc.network.links().size() == inst.network.links().size());
    for (std::size_t l = 0; l < doc.network.links().size(); ++l) {
      const auto& a = doc.network.links()[l];
      const auto& b = inst.network.links()[l];
      CHECK(a.id == b.id);
      CHECK(a.tail == b.tail);
      CHECK(a.head == b.head);
      CHECK(a.cost.k == b.cost.k);
      CHECK(a.cost.b == b.cost.b);
      CHECK(a.cost.n == b.cost.n);
    }
    CHECK(doc.network.nodes() == inst.network.nodes());
    CHECK(doc.paths == declared);
    CHECK(serialize_network_json(doc.network, doc.paths) == text);
  }
}
