#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(CORECUT_BIN) + " " + args + " > cli_stdout.txt 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

const char* kBallConfig = R"({
  "domain": {"dim": 2, "k": 1.0, "shape": {"type": "ball", "center": [1, 0, 0], "radius": 2.0}},
  "samples": 8000,
  "seed": 7,
  "budget": 120
})";

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("cli_tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("faircut command: reports, exit codes, determinism") {
    TempDir tmp("faircut");
    write(tmp.path / "ball.json", kBallConfig);
    const std::string cfg = (tmp.path / "ball.json").string();

    REQUIRE(run("faircut --config " + cfg + " --out " + (tmp.path / "a").string()) == 0);
    const json rep = json::parse(slurp(tmp.path / "a" / "report.json"));
    CHECK(rep.at("tool").at("name") == "corecut");
    CHECK(rep.at("command") == "faircut");
    CHECK(rep.at("seed") == 7);
    CHECK(rep.at("config_hash").get<std::string>().size() == 16);
    const double phi = rep.at("result").at("phi").at("fraction").get<double>();
    CHECK(phi > 0.45);
    CHECK(phi < 0.55);
    CHECK(rep.at("result").at("converged").get<bool>());
    CHECK(fs::exists(tmp.path / "a" / "phi_trace.csv"));

    SUBCASE("same seed, byte-identical report") {
        REQUIRE(run("faircut --config " + cfg + " --out " + (tmp.path / "b").string()) == 0);
        CHECK(slurp(tmp.path / "a" / "report.json") == slurp(tmp.path / "b" / "report.json"));
    }
    SUBCASE("different thread counts, identical numbers") {
        REQUIRE(run("faircut --config " + cfg + " --threads 3 --out " +
                    (tmp.path / "t3").string()) == 0);
        CHECK(slurp(tmp.path / "a" / "report.json") == slurp(tmp.path / "t3" / "report.json"));
    }
    SUBCASE("triangle config recovers the 4/9 index") {
        write(tmp.path / "tri.json", R"({
          "domain": {"dim": 2, "k": 0.0,
                     "shape": {"type": "simplex", "vertices": [[0,0],[1,0],[0,1]]}},
          "samples": 20000, "seed": 9, "budget": 150
        })");
        REQUIRE(run("faircut --config " + (tmp.path / "tri.json").string() + " --out " +
                    (tmp.path / "tri_out").string()) == 0);
        const json trep = json::parse(slurp(tmp.path / "tri_out" / "report.json"));
        const double tphi = trep.at("result").at("phi").at("fraction").get<double>();
        CHECK(std::abs(tphi - 4.0 / 9.0) < 0.02);
    }
    SUBCASE("budget exhaustion exits 2") {
        write(tmp.path / "tiny.json", R"({
          "domain": {"dim": 2, "k": 1.0, "shape": {"type": "ball", "center": [1,0,0], "radius": 2.0}},
          "samples": 2000, "seed": 7, "budget": 2, "marching": false
        })");
        CHECK(run("faircut --config " + (tmp.path / "tiny.json").string() + " --out " +
                  (tmp.path / "c").string()) == 2);
    }
}

TEST_CASE("config validation failures exit 1") {
    TempDir tmp("badcfg");
    CHECK(run("faircut --config no_such_file.json --out " + (tmp.path / "o").string()) == 1);

    write(tmp.path / "unknown.json",
          R"({"domain": {"dim": 2, "k": 1.0, "shape": {"type": "ball", "center": [1,0,0], "radius": 1.0}}, "smaples": 10})");
    CHECK(run("faircut --config " + (tmp.path / "unknown.json").string() + " --out " +
              (tmp.path / "o").string()) == 1);

    write(tmp.path / "nodomain.json", R"({"samples": 1000})");
    CHECK(run("faircut --config " + (tmp.path / "nodomain.json").string() + " --out " +
              (tmp.path / "o").string()) == 1);

    write(tmp.path / "badjson.json", "{");
    CHECK(run("faircut --config " + (tmp.path / "badjson.json").string() + " --out " +
              (tmp.path / "o").string()) == 1);
}

TEST_CASE("core command") {
    TempDir tmp("core");
    write(tmp.path / "ball.json", R"({
      "domain": {"dim": 2, "k": 1.0, "shape": {"type": "ball", "center": [1,0,0], "radius": 2.0}},
      "samples": 8000, "seed": 3, "budget": 120, "pairs": 8000
    })");
    REQUIRE(run("core --config " + (tmp.path / "ball.json").string() + " --out " +
                (tmp.path / "o").string()) == 0);
    const json rep = json::parse(slurp(tmp.path / "o" / "report.json"));
    CHECK(rep.at("density").at("density").at("fraction").get<double>() >= 1.0 / 3.0 - 0.03);
    CHECK(rep.at("bound_ok").get<bool>());
    // the CSV profile is monotone
    std::istringstream csv(slurp(tmp.path / "o" / "density_profile.csv"));
    std::string line;
    std::getline(csv, line);
    double prev = -1.0;
    int rows = 0;
    while (std::getline(csv, line)) {
        const auto c1 = line.find(','), c2 = line.find(',', line.find(',') + 1);
        const double d = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        CHECK(d >= prev);
        prev = d;
        ++rows;
    }
    CHECK(rows == 10);

    SUBCASE("flat domains are rejected") {
        write(tmp.path / "flat.json", R"({
          "domain": {"dim": 2, "k": 0.0, "shape": {"type": "ball", "center": [0,0], "radius": 1.0}},
          "samples": 1000, "seed": 3
        })");
        CHECK(run("core --config " + (tmp.path / "flat.json").string() + " --out " +
                  (tmp.path / "o2").string()) == 1);
    }
}

TEST_CASE("march command") {
    TempDir tmp("march");
    write(tmp.path / "ball.json", R"({
      "domain": {"dim": 2, "k": 1.0, "shape": {"type": "ball", "center": [1,0,0], "radius": 2.0}},
      "samples": 8000, "seed": 5
    })");
    const std::string cfg = (tmp.path / "ball.json").string();

    REQUIRE(run("march --config " + cfg + " --out " + (tmp.path / "o").string()) == 0);
    const json rep = json::parse(slurp(tmp.path / "o" / "report.json"));
    CHECK(rep.at("region").at("excluded_half_spaces").size() == 8);
    CHECK(fs::exists(tmp.path / "o" / "region_points.csv"));

    SUBCASE("1/e threshold accepted") {
        CHECK(run("march --config " + cfg + " --threshold 1/e --out " +
                  (tmp.path / "e").string()) == 0);
    }
    SUBCASE("too few probes warns but runs") {
        CHECK(run("march --config " + cfg + " --probes 2 --out " + (tmp.path / "p2").string()) ==
              0);
    }
    SUBCASE("empty region exits 2") {
        CHECK(run("march --config " + cfg + " --probes 16 --threshold 0.49 --out " +
                  (tmp.path / "x").string()) == 2);
    }
}

TEST_CASE("graph command") {
    TempDir tmp("graph");
    write(tmp.path / "p3.edges", "0 1 1\n1 2 1\n");
    REQUIRE(run("graph --input " + (tmp.path / "p3.edges").string() + " --out " +
                (tmp.path / "o").string()) == 0);
    const json rep = json::parse(slurp(tmp.path / "o" / "report.json"));
    CHECK(rep.at("report").at("core_vertex") == 1);
    CHECK(rep.at("report").at("density")[1].get<double>() == 7.0 / 9.0);
    CHECK(rep.at("report").at("gromov_delta").get<double>() == 0.0);

    SUBCASE("bad lines exit 1") {
        write(tmp.path / "bad.edges", "0 1 1\n0 1 -4\n");
        CHECK(run("graph --input " + (tmp.path / "bad.edges").string() + " --out " +
                  (tmp.path / "o2").string()) == 1);
    }
    SUBCASE("unique-only mode accepted") {
        CHECK(run("graph --input " + (tmp.path / "p3.edges").string() +
                  " --mode unique-only --out " + (tmp.path / "o3").string()) == 0);
    }
}

TEST_CASE("conjecture command") {
    TempDir tmp("conj");
    REQUIRE(run("conjecture --m-min 2 --m-max 3 --samples 8000 --seed 1 --out " +
                (tmp.path / "o").string()) == 0);
    const json rep = json::parse(slurp(tmp.path / "o" / "report.json"));
    REQUIRE(rep.at("findings").size() == 2);
    CHECK(rep.at("findings")[0].at("exact").get<bool>());
    CHECK(rep.at("findings")[0].at("phi").get<double>() ==
          doctest::Approx(4.0 / 9.0).epsilon(1e-9));
    CHECK(rep.at("findings")[1].at("simplex_consistent").get<bool>());
    CHECK(fs::exists(tmp.path / "o" / "findings.csv"));
}
