#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "warpmass/cli.hpp"
#include "warpmass/error.hpp"

using namespace warpmass;
namespace wc = warpmass::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("warpmass_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << body;
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(WARPMASS_EXE) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

wc::json read_json(const fs::path& p) { return wc::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("hashing and number formatting") {
  CHECK(wc::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(wc::format_double(0.1) == "0.10000000000000001");
  CHECK(wc::format_double(-2.0) == "-2");
}

TEST_CASE("config resolution") {
  const wc::json cfg = wc::resolve_config(wc::json{{"model", {{"c", 0.5}}}}, {"green.L=16", "output.directory=\"x\""});
  CHECK(cfg["model"]["c"] == 0.5);
  CHECK(cfg["model"]["k"] == 1);
  CHECK(cfg["green"]["L"] == 16);
  CHECK(cfg["output"]["directory"] == "x");
  CHECK(wc::config_hash(cfg) == wc::config_hash(wc::resolve_config(cfg)));
  CHECK(wc::config_hash(cfg) != wc::config_hash(wc::default_config()));
  CHECK_THROWS_AS(wc::resolve_config(wc::json{{"model", {{"bogus", 1}}}}), Error);
  CHECK_THROWS_AS(wc::resolve_config(wc::json{{"model", {{"k", "two"}}}}), Error);
  CHECK_THROWS_AS(wc::resolve_config(wc::json::object(), {"no_equals_sign"}), Error);
  CHECK_THROWS_AS(wc::model_from_config(wc::resolve_config(wc::json{{"model", {{"profile", "cosh"}}}})), Error);
}

TEST_CASE("conditions exit codes") {
  const fs::path out = scratch() / "cond";
  const auto good = write_config("good.json", R"({"model": {"n": 2, "k": 1, "c": 1.0}})");
  CHECK(run("conditions --config " + good.string() + " --out " + out.string()) == wc::kSuccess);
  const wc::json rep = read_json(out / "conditions.json");
  CHECK(rep["status"] == "OK");
  CHECK(rep["result"]["margins"]["cond_main_1"].get<double>() == doctest::Approx(1.5));
  CHECK(rep["result"]["margins"]["d"].get<double>() == doctest::Approx(0.25));
  CHECK(rep["result"]["margins"]["cond_main"].get<double>() == doctest::Approx(2.0));
  CHECK(rep["config_sha256"] == wc::config_hash(rep["config"]));

  const auto k0 = write_config("k0.json", R"({"model": {"n": 2, "k": 0}})");
  CHECK(run("conditions --config " + k0.string() + " --out " + out.string()) == wc::kInputError);
  CHECK(read_json(out / "conditions.json")["status"] == "FAILED");

  const auto n1 = write_config("n1.json", R"({"model": {"n": 1}})");
  CHECK(run("conditions --config " + n1.string() + " --out " + out.string()) == wc::kCheckFailed);
  CHECK(read_json(out / "conditions.json")["result"]["cond_main_1"]["holds"] == false);

  CHECK(run("conditions --config " + (scratch() / "missing.json").string()) == wc::kInputError);
  CHECK(run("nonsense --config " + good.string()) == wc::kInputError);
  CHECK(run("conditions --config " + good.string() + " --set model.unknown=1") == wc::kInputError);
}

TEST_CASE("randomized sign check is reproducible from the seed") {
  const auto cfg = write_config("rand.json", R"({"conditions": {"random_draws": 200}})");
  const fs::path a = scratch() / "rand_a", b = scratch() / "rand_b";
  CHECK(run("conditions --config " + cfg.string() + " --seed 11 --out " + a.string()) == wc::kSuccess);
  CHECK(run("conditions --config " + cfg.string() + " --seed 11 --out " + b.string()) == wc::kSuccess);
  CHECK(slurp(a / "conditions_random.csv") == slurp(b / "conditions_random.csv"));
  CHECK(read_json(a / "conditions.json")["result"]["random_check"]["agree"] == 200);
}

TEST_CASE("decay report") {
  const fs::path out = scratch() / "decay";
  const auto cfg = write_config("decay.json", R"({"model": {"c": 0.5}})");
  CHECK(run("decay --config " + cfg.string() + " --out " + out.string() + " --emit-plot-data") == wc::kSuccess);
  const std::string csv = slurp(out / "decay_rates.csv");
  CHECK(csv.find("scalar,0,0,-0.80901699437494745") != std::string::npos);
  CHECK(fs::exists(out / "decay_profiles.dat"));
  CHECK(run("decay --config " + cfg.string() + " --out " + out.string() + " --set ode.deviation_bound=1e-12") ==
        wc::kCheckFailed);
}

TEST_CASE("flatness report is byte-identical across runs") {
  const fs::path out = scratch() / "flat";
  const auto cfg = write_config("flat.json", "{}");
  CHECK(run("flatness --config " + cfg.string() + " --out " + out.string()) == wc::kSuccess);
  const std::string first_csv = slurp(out / "flatness.csv"), first_json = slurp(out / "flatness.json");
  CHECK(run("flatness --config " + cfg.string() + " --out " + out.string()) == wc::kSuccess);
  CHECK(slurp(out / "flatness.csv") == first_csv);
  CHECK(slurp(out / "flatness.json") == first_json);
  const wc::json rep = wc::json::parse(first_json);
  CHECK(rep["result"]["cases"] == 125);
  CHECK(rep["result"]["agree"] == 125);
}

TEST_CASE("green report and failure marker") {
  const fs::path out = scratch() / "green";
  const auto cfg = write_config("green.json", R"({"model": {"n": 0, "k": 2, "c": 0.0, "profile": "linear"}})");
  CHECK(run("green --config " + cfg.string() + " --out " + out.string()) == wc::kSuccess);
  CHECK(read_json(out / "green.json")["result"]["leading"]["relative_error"].get<double>() < 1e-6);
  CHECK(slurp(out / "gamma.csv").rfind("theta,r,gamma\n", 0) == 0);

  const auto bad = write_config("green_bad.json", R"({"model": {"n": 0, "k": 2, "c": 0.0, "profile": "linear"},
    "green": {"shell": [0.1, 0.5]}})");
  CHECK(run("green --config " + bad.string() + " --out " + out.string()) == wc::kCheckFailed);
  const std::string modes = slurp(out / "green_modes.csv");
  CHECK(modes.find("# FAILED: ShellTooCoarse") != std::string::npos);
  CHECK(read_json(out / "green.json")["status"] == "FAILED");
}
