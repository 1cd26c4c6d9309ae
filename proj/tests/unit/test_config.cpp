#include "wavemech/config.hpp"
#include "wavemech/scenario.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <functional>

using namespace wavemech;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::configuration);
    return e.what();
  }
  FAIL("expected a configuration error");
  return {};
}

}  // namespace

TEST_CASE("config values, comments and lists") {
  const Config c = Config::parse(
      "# header\n"
      "[grid]\n"
      "points = 64   ; trailing\n"
      "min = -1.5, 2\n"
      "boundary = periodic\n"
      "[run]\n"
      "verbose = yes\n");
  CHECK(c.get_int("grid.points") == 64);
  CHECK(c.get_doubles("grid.min", 2) == std::vector<double>{-1.5, 2.0});
  CHECK(c.get_string("grid.boundary") == "periodic");
  CHECK(c.get_bool("run.verbose", false));
  CHECK(c.get_double("run.missing", 4.0) == 4.0);
  CHECK(c.get_vec("grid.min", 2) == Vec3(-1.5, 2.0));
  const Config b = Config::parse("[a]\nx = 3\n");
  CHECK(b.get_doubles("a.x", 3) == std::vector<double>{3.0, 3.0, 3.0});
}

TEST_CASE("syntax errors carry the line number") {
  CHECK(error_of([] { Config::parse("[a]\nx = 1\nnot a pair\n", "f.cfg"); }).find("f.cfg:3") != std::string::npos);
  CHECK(error_of([] { Config::parse("x = 1\n", "f.cfg"); }).find("f.cfg:1") != std::string::npos);
  CHECK(error_of([] { Config::parse("[a]\nx = 1\n\nx = 2\n", "f.cfg"); }).find("f.cfg:4") != std::string::npos);
  CHECK(error_of([] { Config::parse("[a\n", "f.cfg"); }).find("f.cfg:1") != std::string::npos);
}

TEST_CASE("bad values and unused keys point at their line") {
  const Config c = Config::parse("[a]\nx = 1\ny = abc\nz = 2.5\ntypo = 1\n", "f.cfg");
  CHECK(error_of([&] { c.get_double("a.y"); }).find("f.cfg:3") != std::string::npos);
  CHECK(error_of([&] { c.get_int("a.z"); }).find("f.cfg:4") != std::string::npos);
  c.get_int("a.x");
  const std::string unused = error_of([&] { c.reject_unused(); });
  CHECK(unused.find("typo") != std::string::npos);
  CHECK(unused.find("f.cfg:5") != std::string::npos);
  CHECK(error_of([&] { c.get_string("a.absent"); }).find("a.absent") != std::string::npos);
}

TEST_CASE("serialize round-trips and canonicalises") {
  const Config a = Config::parse("[z]\nb = 2\n[a]\nk = 1 2 3\n");
  const Config b = Config::parse(a.serialize());
  CHECK(a == b);
  CHECK(a.serialize() == "[a]\nk = 1 2 3\n\n[z]\nb = 2\n");
  Config c = a;
  c.set("z.b", "3");
  CHECK_FALSE(a == c);
  CHECK(fnv1a_hex(a.serialize()) != fnv1a_hex(c.serialize()));
}

TEST_CASE("FNV-1a reference vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("every shipped config parses and names a known scenario") {
  for (const auto& entry : std::filesystem::directory_iterator(WAVEMECH_CONFIG_DIR)) {
    const Config c = Config::load(entry.path());
    const auto& names = scenario_names();
    CHECK(std::find(names.begin(), names.end(), c.get_string("scenario.name")) != names.end());
  }
}

TEST_CASE("scenario validation errors fire before any output") {
  const auto out = std::filesystem::temp_directory_path() / "wavemech_test_validation";
  std::filesystem::remove_all(out);
  RunOptions o;
  o.out_dir = out;
  auto run = [&](const std::string& text) { run_scenario(Config::parse(text, "t.cfg"), o); };
  const std::string base =
      "[scenario]\nname = plane_wave\n[physics]\nomega0 = 1\nvelocity = 1.2\n"
      "[grid]\ndims = 1\nmin = 0\nperiod = 83.77580409572781\npoints = 64\ndt = 0.1\nboundary = periodic\n[run]\nsteps = 10\n";
  try {
    run(base);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::superluminal);
  }
  std::string unknown = base;
  unknown.replace(unknown.find("velocity = 1.2"), 14, "velocity = 0.6");
  unknown += "colour = blue\n";
  CHECK(error_of([&] { run(unknown); }).find("run.colour") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(out));
  CHECK(error_of([&] { run("[scenario]\nname = nope\n"); }).find("nope") != std::string::npos);
}
