#include "doctest.h"
#include "fixtures.hpp"
#include "workspace.hpp"
#include "xaistudy/card/card.hpp"
#include "xaistudy/common/error.hpp"

using namespace xaistudy;
using namespace xaistudy::card;

namespace {

EvaluationCard benchmark() { return load_card(xstest::data_dir() + "/cards/benchmark_card.json"); }

}  // namespace

TEST_CASE("checklist shape") {
  const auto& items = checklist();
  CHECK(items.size() == 11);
  std::size_t design = 0;
  for (const auto& i : items) design += i.phase == Phase::design;
  CHECK(design == 8);
  CHECK(items[4].label == "4 (b)");
}

TEST_CASE("the benchmark card validates and renders") {
  const auto card = benchmark();
  CHECK(validate_card(card).empty());
  const std::string text = render_card(card);
  CHECK(text.find("compensation rate was 9.92") != std::string::npos);
  CHECK(text.find("Execution phase:") < text.find("compensation rate was 9.92"));
  CHECK(text.find("Analysis phase:") > text.find("compensation rate was 9.92"));
  CHECK(parse_rendered_card(text) == card);
  CHECK(card_from_json(to_json(card)) == card);
}

TEST_CASE("removing any single answer yields exactly one issue naming it") {
  const auto card = benchmark();
  for (const auto& item : checklist()) {
    auto broken = card;
    broken.phase(item.phase).erase(item.key);
    const auto issues = validate_card(broken);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].item == to_string(item.phase) + "/" + item.key);
    CHECK_THROWS_AS(render_card(broken), ValidationError);
  }
  auto empty = card;
  empty.execution["2"] = ItemAnswer{};
  CHECK(validate_card(empty).size() == 1);
  auto both = card;
  both.execution["2"].not_applicable = "n/a";
  CHECK(validate_card(both).size() == 1);
}

TEST_CASE("pre-registration needs a link") {
  auto card = benchmark();
  card.design["1"].link.clear();
  auto issues = validate_card(card);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].item == "design/1");
  card.design["1"].preregistered = false;
  CHECK(validate_card(card).empty());
}

TEST_CASE("render and parse round trip on random valid cards") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CAPTURE(seed);
    const auto card = xstest::random_valid_card(seed);
    REQUIRE(validate_card(card).empty());
    CHECK(parse_rendered_card(render_card(card)) == card);
    CHECK(card_from_json(to_json(card)) == card);
  }
}

TEST_CASE("fingerprints track content") {
  auto a = benchmark();
  auto b = a;
  CHECK(card_fingerprint(a) == card_fingerprint(b));
  b.execution["2"].answer = "The compensation rate was 12 US dollars per hour.";
  CHECK(card_fingerprint(a) != card_fingerprint(b));
  CHECK_THROWS_AS(card_from_json(Json::array()), SchemaError);
}
