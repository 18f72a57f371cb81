#include "verbspace/taxonomy.hpp"

#include <doctest.h>

#include "test_support.hpp"
#include "verbspace/errors.hpp"

using namespace verbspace;
namespace vt = verbspace::testing;

TEST_CASE("minimal tree: root plus one child") {
  Taxonomy tax = parse_taxonomy(R"({"format_version":1,"nodes":[{"id":"a"}]})");
  CHECK(tax.size() == 2);
  CHECK(tax.leaf_ids() == std::set<std::string>{"a"});
  CHECK(tax.node("a").parent_id == "root");
}

TEST_CASE("ancestor chain of touch-20-1") {
  Taxonomy tax = vt::fixture_taxonomy();
  CHECK(tax.ancestors("touch-20-1") ==
        std::vector<std::string>{"touch-20", "20", "root"});
  CHECK(tax.ancestors("root").empty());
  CHECK(tax.depth("root") == 0);
  CHECK(tax.depth("touch-20-1") == 3);
}

TEST_CASE("deep chain ancestors walk parent links") {
  Taxonomy tax = parse_taxonomy(R"({"format_version":1,"nodes":[
    {"id":"n1"},{"id":"n2","parent":"n1"},{"id":"n3","parent":"n2"},
    {"id":"n4","parent":"n3"}]})");
  CHECK(tax.ancestors("n4") == std::vector<std::string>{"n3", "n2", "n1", "root"});
}

TEST_CASE("descendants") {
  Taxonomy tax = vt::fixture_taxonomy();
  CHECK(tax.descendants("touch-20-1").empty());
  CHECK(tax.descendants("10") == std::set<std::string>{"banish-10.2", "wipe-10.4"});
  auto all = tax.descendants("root");
  CHECK(static_cast<int>(all.size()) == tax.size() - 1);
  CHECK(all.count("root") == 0);
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(parse_taxonomy("not json"), MalformedDocument);
  CHECK_THROWS_AS(parse_taxonomy(R"({"nodes":[]})"), MalformedDocument);
  CHECK_THROWS_AS(parse_taxonomy(R"({"format_version":2,"nodes":[]})"), MalformedDocument);
  CHECK_THROWS_AS(parse_taxonomy(R"({"format_version":1,"nodes":[{"id":"a","bogus":1}]})"),
                  MalformedDocument);
  CHECK_THROWS_AS(
      parse_taxonomy(R"({"format_version":1,"nodes":[{"id":"a"},{"id":"a"}]})"),
      DuplicateId);
  CHECK_THROWS_AS(parse_taxonomy(R"({"format_version":1,"nodes":[{"id":"root"}]})"),
                  DuplicateId);
  CHECK_THROWS_AS(
      parse_taxonomy(R"({"format_version":1,"nodes":[{"id":"a","parent":"ghost"}]})"),
      DanglingParent);
  CHECK_THROWS_AS(parse_taxonomy(R"({"format_version":1,"nodes":[
      {"id":"a","parent":"b"},{"id":"b","parent":"a"}]})"),
                  CyclicTaxonomy);
  CHECK_THROWS_AS(parse_taxonomy(R"({"format_version":1,"nodes":[
      {"id":"a","parent":"a"}]})"),
                  CyclicTaxonomy);
}

TEST_CASE("unknown node queries") {
  Taxonomy tax = vt::fixture_taxonomy();
  CHECK_THROWS_AS(tax.ancestors("ghost"), UnknownNode);
  CHECK_THROWS_AS(tax.descendants("ghost"), UnknownNode);
  CHECK_THROWS_AS(tax.index_of("ghost"), UnknownNode);
}

TEST_CASE("canonical serialization is a parse fixpoint") {
  Taxonomy tax = vt::fixture_taxonomy();
  const std::string once = tax.serialize();
  Taxonomy again = parse_taxonomy(once);
  CHECK(again.serialize() == once);
  CHECK(again.fingerprint() == tax.fingerprint());
  CHECK(again.size() == tax.size());
  // member links survive the round trip
  CHECK(again.node("touch-20-1").members[0].wordnet ==
        std::vector<std::string>{"hold%2:35:00"});
}

TEST_CASE("tree properties on random taxonomies") {
  RngStream rng(7, "test/taxonomy");
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(40));
    Taxonomy tax = parse_taxonomy(vt::random_taxonomy_json(n, rng));
    CHECK(tax.size() == n + 1);

    std::size_t child_total = 0;
    for (const auto& id : tax.ordered_ids()) {
      child_total += tax.children(id).size();
      CHECK(tax.depth(id) == static_cast<int>(tax.ancestors(id).size()));

      auto up = tax.ancestors(id);
      auto down = tax.descendants(id);
      CHECK(down.count(id) == 0);
      for (const auto& a : up) {
        CHECK(a != id);
        CHECK(down.count(a) == 0);
      }
      if (!up.empty()) CHECK(up.back() == "root");
    }
    CHECK(child_total == static_cast<std::size_t>(tax.size() - 1));

    const std::string canon = tax.serialize();
    CHECK(parse_taxonomy(canon).serialize() == canon);
  }
}

TEST_CASE("split_rare") {
  std::set<std::string> leaves{"a", "b"};
  std::map<std::string, std::int64_t> counts{{"a", 1}, {"b", 100}};
  auto [rare, non_rare] = split_rare(leaves, counts, 10);
  CHECK(rare == std::set<std::string>{"a"});
  CHECK(non_rare == std::set<std::string>{"b"});

  counts["a"] = 10;
  auto [rare2, non_rare2] = split_rare(leaves, counts, 10);
  CHECK(rare2.empty());
  CHECK(non_rare2.size() == 2);

  CHECK_THROWS_AS(split_rare(std::set<std::string>{"a", "ghost"}, counts, 10), MissingCount);
}
