#include "doctest.h"

#include "bicon/checks.hpp"
#include "bicon/scenarios.hpp"

using namespace bicon;
using nlohmann::json;

namespace {

json minimal_manifest() {
  json j;
  j["schema"] = 1;
  j["name"] = "mini";
  j["coordinates"] = json::array({"t", "x"});
  j["metric"] = json::array({json::array({"1", "0"}), json::array({"0", "-1"})});
  return j;
}

}  // namespace

TEST_CASE("defaults: base 0.1, half-width 0.5, count 32, seed 42, order 4") {
  Manifest m = Manifest::from_json(minimal_manifest());
  m.validate();
  CHECK(m.base == Point{0.1, 0.1});
  CHECK(m.half_widths == std::vector<double>{0.5, 0.5});
  CHECK(m.sample_count == 32);
  CHECK(m.seed == 42);
  CHECK(m.tol.pass == 1e-7);
  CHECK(m.tol.fail == 1e-4);
  CHECK(m.tol.fd_step == 1e-5);
  CHECK(m.jet_order == 4);
}

TEST_CASE("validation errors carry field-level messages") {
  {
    json j = minimal_manifest();
    j["metric"][0][1] = "z + 1";
    Manifest m = Manifest::from_json(j);
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("metric[0][1]"), ValidationError);
  }
  {
    json j = minimal_manifest();
    j["fields"]["xi"] = json::array({"1"});
    Manifest m = Manifest::from_json(j);
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("fields.xi"), ValidationError);
  }
  {
    json j = minimal_manifest();
    j["tolerances"]["pass"] = 1e-3;
    j["tolerances"]["fail"] = 1e-5;
    Manifest m = Manifest::from_json(j);
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("pass"), ValidationError);
  }
  {
    json j = minimal_manifest();
    j["domain"]["half_widths"] = json::array({0.5, -0.1});
    Manifest m = Manifest::from_json(j);
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("half_widths"), ValidationError);
  }
  {
    json j = minimal_manifest();
    j["gauges"]["ghost"]["alpha"] = "0";
    j["gauges"]["ghost"]["beta"] = "0";
    Manifest m = Manifest::from_json(j);
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("no such field"), ValidationError);
  }
  {
    json j = minimal_manifest();
    j["metric"][0][1] = "0.5";  // asymmetric vs metric[1][0] = "0"
    Manifest m = Manifest::from_json(j);
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("symmetric"), ValidationError);
  }
}

TEST_CASE("sampling: determinism, count one, box containment") {
  Manifest m = Manifest::from_json(minimal_manifest());
  auto a = m.sample_points();
  auto b = m.sample_points();
  CHECK(a.size() == 32);
  CHECK(a == b);
  CHECK(a[0] == m.base);
  for (const auto& x : a)
    for (int c = 0; c < 2; ++c)
      CHECK(std::abs(x[c] - m.base[c]) <= m.half_widths[c] + 1e-15);

  Manifest one = m;
  one.sample_count = 1;
  CHECK(one.sample_points() == std::vector<Point>{m.base});

  Manifest reseeded = m;
  reseeded.seed = 7;
  CHECK(reseeded.sample_points() != a);
}

TEST_CASE("manifest to_json survives a round trip") {
  Manifest m = scenario("rw-expanding");
  Manifest back = Manifest::from_json(m.to_json());
  back.validate();
  CHECK(back.name == m.name);
  CHECK(back.coordinates == m.coordinates);
  CHECK(back.metric == m.metric);
  CHECK(back.fields == m.fields);
  CHECK(back.sample_points() == m.sample_points());
}

TEST_CASE("reports are byte-identical across runs") {
  Manifest m = scenario("rw-expanding");
  auto r1 = check_bcvf(m, "xi");
  auto r2 = check_bcvf(m, "xi");
  CHECK(make_report(&m, r1).dump(2) == make_report(&m, r2).dump(2));
}

TEST_CASE("every built-in scenario validates and samples deterministically") {
  for (const auto& name : scenario_names()) {
    CAPTURE(name);
    Manifest m = scenario(name);
    CHECK(m.sample_points().size() == static_cast<std::size_t>(m.sample_count));
  }
}

TEST_CASE("unknown scenario and root-less checks raise targeted errors") {
  CHECK_THROWS_WITH_AS(scenario("nope"), doctest::Contains("unknown scenario"), Error);
  Manifest m = Manifest::from_json(minimal_manifest());
  m.validate();
  CHECK_THROWS_WITH_AS(m.root_field(), doctest::Contains("square root"), ValidationError);
}
