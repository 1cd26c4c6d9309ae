#include "helpers.hpp"

#include "wavemech/config.hpp"
#include "wavemech/snapshot.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace wavemech;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string("\"") + WAVEMECH_CLI + "\" " + args + " >\"" + (dir / "stdout.txt").string() +
                          "\" 2>\"" + (dir / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(dir / "stdout.txt");
  o.err = slurp(dir / "stderr.txt");
  return o;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::string plane_wave_text(const std::string& physics_extra, const std::string& velocity = "0.6") {
  return "[scenario]\nname = plane_wave\n[physics]\nomega0 = 1\nvelocity = " + velocity + "\n" + physics_extra +
         "[grid]\ndims = 1\nmin = 0\nperiod = 83.77580409572781\npoints = 256\ndt = 0.1\nboundary = periodic\n"
         "[run]\nt_end = 10\nsave_stride = 10\n";
}

}  // namespace

TEST_CASE("cli: verify a shipped config exits 0 and writes the report") {
  const auto dir = testing::scratch_dir("cli_verify");
  const auto r = cli("--out-dir \"" + (dir / "out").string() + "\" verify \"" WAVEMECH_CONFIG_DIR "/plane_wave.cfg\"", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS clock") != std::string::npos);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report["all_pass"] == true);
  CHECK(report["checks"].size() == 5);
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["scenario"] == "plane_wave");
  const Config cfg = Config::load(WAVEMECH_CONFIG_DIR "/plane_wave.cfg");
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  (void)cfg;
}

TEST_CASE("cli: simulate exits 0 without a report") {
  const auto dir = testing::scratch_dir("cli_simulate");
  const auto r = cli("--out-dir \"" + (dir / "out").string() + "\" simulate \"" WAVEMECH_CONFIG_DIR "/plane_wave.cfg\"", dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out" / "trajectory.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("cli: superluminal boost exits 2 and names the cause") {
  const auto dir = testing::scratch_dir("cli_superluminal");
  const auto cfg = write_config(dir, "fast.cfg", plane_wave_text("", "1.2"));
  const auto r = cli("--out-dir \"" + (dir / "out").string() + "\" verify \"" + cfg.string() + "\"", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("superluminal boost") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("cli: malformed config exits 2 with the offending line") {
  const auto dir = testing::scratch_dir("cli_badline");
  const auto cfg = write_config(dir, "bad.cfg", "[scenario]\nname = plane_wave\n[physics]\nomega0 one\n");
  const auto r = cli("verify \"" + cfg.string() + "\"", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("bad.cfg:4") != std::string::npos);

  const auto typo = write_config(dir, "typo.cfg", plane_wave_text("omgea0 = 1\n"));
  const auto t = cli("--out-dir \"" + (dir / "out").string() + "\" verify \"" + typo.string() + "\"", dir);
  CHECK(t.code == 2);
  CHECK(t.err.find("typo.cfg:6") != std::string::npos);

  const auto nan = write_config(dir, "value.cfg", plane_wave_text("", "fast"));
  const auto v = cli("--out-dir \"" + (dir / "out").string() + "\" verify \"" + nan.string() + "\"", dir);
  CHECK(v.code == 2);
  CHECK(v.err.find("value.cfg:5") != std::string::npos);
}

TEST_CASE("cli: usage errors exit 2") {
  const auto dir = testing::scratch_dir("cli_usage");
  CHECK(cli("", dir).code == 2);
  CHECK(cli("verify", dir).code == 2);
  CHECK(cli("--threads 0 verify x.cfg", dir).code == 2);
  CHECK(cli("verify \"" + (dir / "missing.cfg").string() + "\"", dir).code == 2);
}

TEST_CASE("cli: an unstable mass term diverges with exit 3 and keeps the last good slice") {
  const auto dir = testing::scratch_dir("cli_diverge");
  // Leapfrog with dt Omega far above 2 grows without bound.
  const auto cfg = write_config(dir, "unstable.cfg", plane_wave_text("Omega = 1000\n"));
  const auto r = cli("--out-dir \"" + (dir / "out").string() + "\" simulate \"" + cfg.string() + "\"", dir);
  CHECK(r.code == 3);
  CHECK(r.err.find("diverged") != std::string::npos);
  REQUIRE(fs::exists(dir / "out" / "last_good.bin"));
  const Snapshot s = read_snapshot(dir / "out" / "last_good.bin");
  CHECK(s.field.size() == 256);
}

TEST_CASE("cli: render writes a P6 image of a snapshot") {
  const auto dir = testing::scratch_dir("cli_render");
  GridSpec g = testing::square(-1.0, 1.0, 9);
  write_snapshot(dir / "psi.bin", ComplexField::generate(g, [](const Vec3& x) { return Complex(1.0 + x[0], x[1]); }), "psi");
  const auto r = cli("render \"" + (dir / "psi.bin").string() + "\" --scale log --out \"" + (dir / "psi.ppm").string() + "\"", dir);
  CHECK(r.code == 0);
  const std::string img = slurp(dir / "psi.ppm");
  CHECK(img.rfind("P6\n9 9\n255\n", 0) == 0);
  CHECK(img.size() == std::string("P6\n9 9\n255\n").size() + 9 * 9 * 3);
  const auto bad = cli("render \"" + (dir / "psi.bin").string() + "\" --quantity energy --out x.ppm", dir);
  CHECK(bad.code == 2);
}
