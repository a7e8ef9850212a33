#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "../../tools/commands.hpp"
#include "bnpsurv/errors.hpp"

using namespace bnpsurv;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run call(std::vector<std::string> args) {
  args.insert(args.begin(), "bnpsurv");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("bnpsurv_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("format_double and fnv1a") {
  CHECK(cli::format_double(0.1) == "0.1");
  CHECK(cli::format_double(1.0) == "1");
  CHECK(cli::format_double(std::nan("")) == "nan");
  CHECK(cli::format_double(-INFINITY) == "-inf");
  CHECK(std::stod(cli::format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(cli::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(cli::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("grid specs") {
  SurvivalSample s({{1.0, true}, {2.0, false}});
  auto g = cli::parse_grid("5:0:2", s);
  REQUIRE(g.size() == 5);
  CHECK(g[1] == 0.5);
  CHECK(g[4] == 2.0);
  CHECK(cli::parse_grid("0.5,1,3", s) == std::vector<double>{0.5, 1.0, 3.0});
  CHECK(cli::parse_grid("auto", s).size() >= 512);
  CHECK_THROWS_AS(cli::parse_grid("1:0:2", s), UsageError);
  CHECK_THROWS_AS(cli::parse_grid("3:2:1", s), UsageError);
  CHECK_THROWS_AS(cli::parse_grid("1,1", s), UsageError);
  CHECK_THROWS_AS(cli::parse_grid("1,x", s), UsageError);
  CHECK_THROWS_AS(cli::parse_grid("5:0", s), UsageError);
}

TEST_CASE("simulate writes a headed CSV") {
  TempDir d;
  auto r = call({"simulate", "--n", "1000", "--seed", "4", "-o", d / "s.csv"});
  REQUIRE(r.code == 0);
  auto ls = lines(slurp(d / "s.csv"));
  REQUIRE(!ls.empty());
  CHECK(ls[0].rfind("#", 0) == 0);
  CHECK(ls[0].find("config_hash=") != std::string::npos);
  CHECK(ls[0].find("seed=4") != std::string::npos);
  std::size_t rows = 0;
  for (const auto& l : ls) rows += (!l.empty() && l[0] != '#' && l.find("time") == std::string::npos) ? 1 : 0;
  CHECK(rows == 1000);
  CHECK(load_csv(d / "s.csv").size() == 1000);
}

TEST_CASE("usage and data errors map to exit codes") {
  TempDir d;
  CHECK(call({"simulate", "--n", "0"}).code == 1);
  CHECK(call({}).code == 1);
  CHECK(call({"frobnicate"}).code == 1);
  CHECK(call({"fit"}).code == 1);
  CHECK(call({"fit", "-i", d / "missing.csv"}).code == 2);
  REQUIRE(call({"simulate", "--n", "30", "-o", d / "s.csv"}).code == 0);
  auto r = call({"fit", "-i", d / "s.csv", "--k", "30"});
  CHECK(r.code == 1);
  CHECK(r.err.find("k must be smaller") != std::string::npos);
  CHECK(call({"fit", "-i", d / "s.csv", "--tail", "gamma"}).code == 1);
  CHECK(call({"validate", "--suite", "nope"}).code == 1);
  std::ofstream(d / "bad.csv") << "time,event\n1.0,2\n";
  CHECK(call({"fit", "-i", d / "bad.csv"}).code == 2);
  std::ofstream(d / "bad.json") << "{\"tail\": 3}";
  CHECK(call({"splice", "-i", d / "s.csv", "--fit", d / "bad.json", "--grid", "1,2"}).code == 2);
}

TEST_CASE("fit, splice and sample pipeline") {
  TempDir d;
  REQUIRE(call({"simulate", "--n", "1000", "--seed", "2", "-o", d / "s.csv"}).code == 0);
  REQUIRE(call({"fit", "-i", d / "s.csv", "-o", d / "fit.json", "--qq", d / "qq.csv"}).code == 0);
  auto j = nlohmann::json::parse(slurp(d / "fit.json"));
  CHECK(j["tail"] == "pareto");
  CHECK(j["k"] == 64);
  CHECK(j["n"] == 1000);
  CHECK(j["alpha_hat"].get<double>() > 1.0);
  CHECK(j["alpha_hat"].get<double>() < 3.0);
  CHECK(lines(slurp(d / "qq.csv")).size() > 3);

  auto r = call({"splice", "-i", d / "s.csv", "--fit", d / "fit.json", "--exact-splice", "--grid",
                 "0.5,1,2,400,800"});
  REQUIRE(r.code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 7);
  CHECK(ls[0].find("a_n=inf") != std::string::npos);
  auto field = [](const std::string& row, int idx) {
    std::istringstream in(row);
    std::string f;
    for (int i = 0; i <= idx; ++i) std::getline(in, f, ',');
    return std::stod(f);
  };
  const double t0 = j["threshold"].get<double>();
  REQUIRE(t0 < 400.0);
  // beyond the data the spliced survival follows the Pareto tail exactly
  const double alpha = j["alpha_hat"].get<double>();
  const double ratio = field(ls[6], 3) / field(ls[5], 3);
  CHECK(ratio == doctest::Approx(std::pow(2.0, -alpha)).epsilon(1e-8));

  auto s1 = call({"sample", "-i", d / "s.csv", "--paths", "1", "--seed", "9", "--grid", "1,2,5"});
  auto s2 = call({"sample", "-i", d / "s.csv", "--paths", "1", "--seed", "9", "--grid", "1,2,5"});
  REQUIRE(s1.code == 0);
  CHECK(s1.out == s2.out);
  CHECK(lines(s1.out)[1] == "t,mean,sd");

  auto b = call({"sample", "-i", d / "s.csv", "--paths", "50", "--process", "survival", "--grid",
                 "1,2,5", "--paths-output", d / "paths.csv"});
  REQUIRE(b.code == 0);
  CHECK(lines(b.out)[1] == "t,mean,sd,lower,upper");
  CHECK(lines(slurp(d / "paths.csv")).size() == 5);
  CHECK(call({"sample", "-i", d / "s.csv", "--process", "odds"}).code == 1);
  CHECK(call({"sample", "-i", d / "s.csv", "--level", "1"}).code == 1);
}

TEST_CASE("validate with an injected fault fails numerically") {
  auto ok = call({"validate", "--suite", "moments"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("suite moments: PASS") != std::string::npos);
  auto bad = call({"validate", "--suite", "moments", "--inject-fault"});
  CHECK(bad.code == 3);
  CHECK(bad.out.find("suite moments: FAIL") != std::string::npos);
}

TEST_CASE("reruns are byte-identical and config files reproduce the hash") {
  TempDir d;
  REQUIRE(call({"--save-config", d / "cfg.ini", "simulate", "--kind", "weibull", "--n", "200",
                "--seed", "3", "-o", d / "a.csv"})
              .code == 0);
  REQUIRE(call({"simulate", "--kind", "weibull", "--n", "200", "--seed", "3", "-o", d / "b.csv"})
              .code == 0);
  CHECK(slurp(d / "a.csv") == slurp(d / "b.csv"));
  REQUIRE(call({"--config", d / "cfg.ini", "simulate", "-o", d / "c.csv"}).code == 0);
  const auto a = slurp(d / "a.csv");
  // output paths stay out of the hash, so a config-file rerun matches byte for byte
  CHECK(slurp(d / "c.csv") == a);
  CHECK(call({"simulate", "--n", "200", "--seed", "4", "-o", d / "e.csv"}).code == 0);
  CHECK(slurp(d / "e.csv") != a);
}
