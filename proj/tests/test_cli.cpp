#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(MDLVQ_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    size_t k;
    while ((k = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, k);
    const int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("mdlvq_cli_" + std::to_string(::getpid()) + "_" +
                                           ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string write(const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }

    fs::path dir;
};

const char* kScalar45 = R"({"lattice":"Z","L":1,"scale":0.05,
  "sublattices":[{"kind":"scalar","a":4,"b":0},{"kind":"scalar","a":5,"b":0}],
  "samples":20000,"seed":3,"blockSize":4096})";

}  // namespace

TEST_F(Cli, BuildScalarTable) {
    const auto cfg = write("c.json", kScalar45);
    const auto r = run("build-labeling --config " + cfg + " --out " + path("lab.json"));
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(slurp(path("lab.json")));
    EXPECT_EQ(j["entries"].size(), 20u);
    EXPECT_EQ(j["version"], 1);
}

TEST_F(Cli, BuildGaussianConjugates) {
    const auto cfg = write("c.json", R"({"lattice":"Z","L":2,
      "sublattices":[{"kind":"gaussian","a":2,"b":1},{"kind":"gaussian","a":2,"b":-1}]})");
    ASSERT_EQ(run("build-labeling --config " + cfg + " --out " + path("lab.json")).code, 0);
    const auto j = nlohmann::json::parse(slurp(path("lab.json")));
    EXPECT_EQ(j["entries"].size(), 25u);
}

TEST_F(Cli, BuildIdentity) {
    const auto cfg = write("c.json", R"({"lattice":"Z","L":1,
      "sublattices":[{"kind":"scalar","a":1,"b":0},{"kind":"scalar","a":1,"b":0}]})");
    const auto r = run("build-labeling --config " + cfg);
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out)["entries"].size(), 1u);
}

TEST_F(Cli, InfeasibleIndexIsInputError) {
    const auto cfg = write("c.json", R"({"lattice":"Z","L":1,
      "sublattices":[{"kind":"scalar","a":100,"b":0},{"kind":"scalar","a":1,"b":0},{"kind":"scalar","a":1,"b":0}]})");
    EXPECT_EQ(run("build-labeling --config " + cfg).code, 2);
}

TEST_F(Cli, BadInputs) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("build-labeling").code, 2);
    EXPECT_EQ(run("build-labeling --config " + path("missing.json")).code, 2);
    EXPECT_EQ(run("build-labeling --config " + write("bad.json", "{not json")).code, 2);
    EXPECT_EQ(run("simulate --config " + write("w.json", kScalar45) + " --workers 0").code, 2);
    const auto zero = write("z.json", R"({"lattice":"Z","L":1,"samples":0,
      "sublattices":[{"kind":"scalar","a":4,"b":0},{"kind":"scalar","a":5,"b":0}]})");
    EXPECT_EQ(run("simulate --config " + zero).code, 2);
}

TEST_F(Cli, SimulateIsReproducible) {
    const auto cfg = write("c.json", kScalar45);
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("a.csv")).code, 0);
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("b.csv")).code, 0);
    ASSERT_EQ(run("simulate --config " + cfg + " --workers 4 --out " + path("c.csv")).code, 0);
    ASSERT_EQ(run("simulate --config " + cfg + " --seed 4 --out " + path("d.csv")).code, 0);
    const auto a = slurp(path("a.csv"));
    EXPECT_EQ(a.rfind("# schema=mdlvq.sim/1\npattern,samples,empirical_mse,theory_mse,db_gap\n", 0), 0u);
    EXPECT_EQ(a, slurp(path("b.csv")));
    EXPECT_EQ(a, slurp(path("c.csv")));
    EXPECT_NE(a, slurp(path("d.csv")));
}

TEST_F(Cli, SimulateFromStoredLabeling) {
    std::string text = kScalar45;
    ASSERT_EQ(run("build-labeling --config " + write("c.json", text) + " --out " + path("lab.json")).code, 0);
    text.insert(1, "\"labeling\":\"" + path("lab.json") + "\",");
    const auto withLab = write("l.json", text);
    const auto a = run("simulate --config " + withLab);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, run("simulate --config " + path("c.json")).out);
    // stored labeling belongs to another system
    const auto other = write("o.json", R"({"lattice":"Z","L":1,"scale":0.05,"labeling":")" + path("lab.json") + R"(",
      "sublattices":[{"kind":"scalar","a":5,"b":0},{"kind":"scalar","a":4,"b":0}]})");
    EXPECT_EQ(run("simulate --config " + other).code, 2);
}

TEST_F(Cli, AnalyzeTables) {
    const auto f = run("analyze fig2");
    ASSERT_EQ(f.code, 0);
    std::istringstream in(f.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# schema=mdlvq.table/1");
    std::getline(in, line);
    EXPECT_EQ(line, "L,gsl_term,phi_term,ordered");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(line.substr(line.size() - 4), "true");
    }
    EXPECT_EQ(rows, 11);
    const auto r = run("analyze rateloss --L 1");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("\n1,"), std::string::npos);
    EXPECT_EQ(run("analyze psi-table").code, 0);
    EXPECT_EQ(run("analyze product").code, 0);
    EXPECT_EQ(run("analyze pradhan").code, 0);
    EXPECT_EQ(run("analyze binning-threshold").code, 0);
}

TEST_F(Cli, EvenDimensionUnsupported) {
    EXPECT_EQ(run("analyze rateloss --L 2").code, 2);
    EXPECT_EQ(run("analyze psi-table --L 4").code, 2);
    EXPECT_EQ(run("analyze fig2 --L 20").code, 2);
    EXPECT_EQ(run("analyze nope").code, 2);
}

TEST_F(Cli, VerifySuites) {
    const auto m = run("verify --suites matching identities");
    ASSERT_EQ(m.code, 0);
    const auto j = nlohmann::json::parse(m.out);
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_EQ(j["suites"].size(), 2u);
    const auto good = run("verify --suites oracle --oracle-samples 4000000 --workers 2");
    EXPECT_EQ(good.code, 0) << good.out;
    const auto bad = run("verify --suites oracle --oracle-samples 1000000 --perturb-beta 1.01");
    EXPECT_EQ(bad.code, 1);
    EXPECT_FALSE(nlohmann::json::parse(bad.out)["pass"].get<bool>());
    const auto none = run("verify --suites");
    EXPECT_EQ(none.code, 0);
    const auto k = nlohmann::json::parse(none.out);
    EXPECT_EQ(k["suites"].size(), 0u);
    EXPECT_EQ(k["warnings"].size(), 1u);
}
