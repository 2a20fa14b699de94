#include <json.hpp>

#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args)
{
    const std::string cmd = std::string(EIKONAL_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    Run r;
    std::array<char, 4096> buf{};
    while (const std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe))
        r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch()
{
    const fs::path dir = fs::path(EIKONAL_TEST_DIR) / "cli_scratch";
    fs::create_directories(dir);
    return dir;
}

std::string write_config(const std::string& name, const std::string& body)
{
    const fs::path p = scratch() / name;
    std::ofstream(p) << body;
    return p.string();
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        if (!l.empty())
            out.push_back(l);
    return out;
}

const char* kTrivial = R"({"kind": "3d", "g": "1", "k": "0",
    "variants": {"constraint": "paper_y_display", "p": "P_printed", "r": "R_printed"}})";

} // namespace

TEST_CASE("eval prints the worked branch")
{
    const auto cfg = write_config("trivial.json", kTrivial);
    const auto r = run("eval " + cfg + " --point 0,0.6,0,0.8");
    CHECK(r.code == 0);
    CHECK(r.out.find("u=-1") != std::string::npos);
    CHECK(r.out.find("v=0.5") != std::string::npos);
    CHECK(lines(r.out).size() == 1);

    CHECK(run("eval --config " + cfg + " --point=0,0.6,0,0.8").code == 0);
    CHECK(run("eval " + cfg + " --point 0,0,0,0").code == 2);
}

TEST_CASE("config errors exit 1 and name the field")
{
    const auto bad = write_config("bad_g.json", R"({"kind": "3d", "g": "z1+", "k": "0"})");
    const auto r = run("eval " + bad + " --point 0,0.6,0,0.8");
    CHECK(r.code == 1);
    CHECK(r.out.find("parse error in g at position 3") != std::string::npos);

    const auto unknown = write_config("unknown_key.json", R"({"kind": "3d", "g": "1", "k": "0", "colour": 1})");
    const auto u = run("eval " + unknown + " --point 0,0.6,0,0.8");
    CHECK(u.code == 1);
    CHECK(u.out.find("colour") != std::string::npos);

    CHECK(run("eval " + (scratch() / "missing.json").string() + " --point 0,0,0,1").code == 1);
    CHECK(run("eval " + write_config("notjson.json", "{") + " --point 0,0,0,1").code == 1);
    const auto cfg = write_config("trivial.json", kTrivial);
    CHECK(run("eval " + cfg + " --point 0,1").code == 1);
}

TEST_CASE("config from standard input")
{
    const auto cfg = write_config("trivial.json", kTrivial);
    const auto r = run("eval - --point 0,0.6,0,0.8 < " + cfg);
    CHECK(r.code == 0);
    CHECK(r.out.find("u=-1") != std::string::npos);
}

TEST_CASE("grid writes one row per branch")
{
    const auto cfg = write_config("grid.json", R"({"kind": "3d", "g": "1", "k": "0",
        "variants": {"constraint": "paper_y_display", "p": "P_printed", "r": "R_printed"},
        "grid": {"min": [0, 0.3, 0, 0.5], "max": [1, 0.3, 0, 1], "count": [2, 1, 1, 2]}})");
    const fs::path out = scratch() / "grid.csv";
    REQUIRE(run("grid " + cfg + " --out " + out.string()).code == 0);
    const auto rows = lines(slurp(out));
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "x0,x1,x2,x3,branch,z1,z2,s,u,v,res_uu,res_vv,res_uv,converged,iters");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::vector<std::string> cols;
        std::istringstream in(rows[i]);
        for (std::string c; std::getline(in, c, ',');)
            cols.push_back(c);
        REQUIRE(cols.size() == 15);
        CHECK(cols[13] == "1");
        for (int k = 10; k < 13; ++k)
            CHECK(std::abs(std::stod(cols[k])) <= 1e-6);
    }
    // row-major with the last axis fastest
    CHECK(rows[1].rfind("0,0.29999999999999999,0,0.5,", 0) == 0);
    CHECK(rows[2].rfind("0,0.29999999999999999,0,1,", 0) == 0);
}

TEST_CASE("grid marks the x3 = 0 plane as not converged")
{
    const auto cfg = write_config("grid_zero.json", R"({"kind": "3d", "g": "1", "k": "0",
        "variants": {"constraint": "paper_y_display", "p": "P_printed", "r": "R_printed"},
        "grid": {"min": [0, 0.3, 0, 0], "max": [0, 0.3, 0, 1], "count": [1, 1, 1, 2]}})");
    const auto r = run("grid " + cfg);
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1] == "0,0.29999999999999999,0,0,,,,,,,,,,0,");
    CHECK(rows[2].find(",1,") != std::string::npos);
}

TEST_CASE("grid output is byte-stable")
{
    const auto cfg = write_config("grid_auto.json", R"({"kind": "3d", "g": "1 + 0.2*z1", "k": "0.1*z2^2",
        "variants": "auto", "seed": 5, "samples": 4,
        "grid": {"min": [-0.5, -0.5, 0, 0.4], "max": [0.5, 0.5, 0, 0.8], "count": [2, 2, 1, 2]}})");
    const auto a = run("grid " + cfg);
    const auto b = run("grid " + cfg);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(lines(a.out).size() >= 9);
}

TEST_CASE("unwritable output path")
{
    const auto cfg = write_config("trivial.json", kTrivial);
    CHECK(run("grid " + cfg + " --out " + (scratch() / "no/such/dir/out.csv").string()).code == 1);
}

TEST_CASE("audit JSON")
{
    const auto cfg = write_config("trivial.json", kTrivial);
    const auto r = run("audit " + cfg + " --samples 6 --seed 11");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    for (const char* key : {"family", "variants", "selected", "seed", "samples"})
        CHECK(j.contains(key));
    CHECK(j["seed"] == 11);
    CHECK(j["samples"] == 6);
    CHECK(j["selected"]["constraint"] == "paper_y_display");
    REQUIRE(j["variants"].is_array());
    for (const auto& v : j["variants"])
        for (const char* key : {"constraint", "p", "r", "max_res_uu", "max_res_vv", "max_res_uv", "mixed_defect"})
            CHECK(v.contains(key));

    const auto zero = run("audit " + cfg + " --samples 0");
    CHECK(zero.code == 1);
    CHECK(zero.out.find("samples must be") != std::string::npos);

    const auto twod = write_config("twod.json", R"({"kind": "2d", "g": "z", "k": "0", "h": "0"})");
    CHECK(run("audit " + twod).code == 1);
}

TEST_CASE("audit gate outcome drives the exit code")
{
    const auto cfg = write_config("pair.json", R"({"kind": "3d", "g": "1 + 0.2*z1", "k": "0.1*z2^2"})");
    const auto r = run("audit " + cfg + " --samples 6");
    REQUIRE((r.code == 0 || r.code == 3));
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["passed"] == (r.code == 0));
    CHECK(j["selected"].is_object());
}

TEST_CASE("2+1 evaluation")
{
    const auto cfg = write_config("linear2d.json", R"({"kind": "2d", "g": "z", "k": "0", "h": "0"})");
    const auto r = run("family2d " + cfg + " --point 2,0,-1");
    CHECK(r.code == 0);
    CHECK(lines(r.out).size() == 2);
    CHECK(run("family2d " + cfg + " --point 0.5,0,-1").code == 2);
    CHECK(run("eval " + cfg + " --point 2,0,-1").code == 0);
}

TEST_CASE("verify")
{
    const auto cfg = write_config("trivial.json", kTrivial);
    CHECK(run("verify " + cfg + " --point 0,0.6,0,0.8").code == 0);
    const auto x = write_config("xdisplay.json", R"({"kind": "3d", "g": "1", "k": "0",
        "variants": {"constraint": "paper_x_display", "p": "P_printed", "r": "R_printed"}})");
    CHECK(run("verify " + x + " --point 0,0.6,0,0.8").code == 3);
}

TEST_CASE("selfcheck")
{
    const auto ok = run("selfcheck");
    CHECK(ok.code == 0);
    int named = 0;
    for (const auto& l : lines(ok.out))
        if (l.find("PASS") != std::string::npos)
            ++named;
    CHECK(named >= 6);

    const auto bad = run("selfcheck --metric 1,1,1,1");
    CHECK(bad.code == 4);
    CHECK(bad.out.find("FAIL") != std::string::npos);
    CHECK(bad.out.find("plane_wave_pair") != std::string::npos);
}
