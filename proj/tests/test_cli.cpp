#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path work_dir()
{
    const auto dir = fs::temp_directory_path() / "stereotune_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run run(const std::string& args)
{
    const fs::path dir = work_dir();
    const std::string cmd = std::string("cd '") + dir.string() + "' && '" STEREOTUNE_CLI_PATH "' " +
                            args + " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(dir / "stdout.txt");
    r.err = slurp(dir / "stderr.txt");
    return r;
}

void make_pair()
{
    const Run r = run("synth --width 40 --height 30 --disparity 3 --noise-seed 4 "
                      "--out-left l.pgm --out-right r.pgm --out-gt gt.pfm");
    REQUIRE(r.code == 0);
}

} // namespace

TEST_CASE("cli: usage errors exit 1")
{
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("disparity --left a.pgm").code == 1);
    CHECK(run("synth --width 128 --height 96 --disparity 64 --out-left a --out-right b --out-gt c")
              .code == 1);
    make_pair();
    CHECK(run("optimize --left l.pgm --right r.pgm --gt gt.pfm --metric bpx --log h.csv --out p.json")
              .code == 1);
}

TEST_CASE("cli: data errors exit 2 and name the file")
{
    const Run r = run("disparity --left missing.pgm --right missing.pgm --out d.pfm");
    CHECK(r.code == 2);
    CHECK(r.err.find("missing.pgm") != std::string::npos);

    std::ofstream(work_dir() / "bad.pgm") << "P5 2 2 65535\n";
    const Run bad = run("disparity --left bad.pgm --right bad.pgm --out d.pfm");
    CHECK(bad.code == 2);
    CHECK(bad.err.find("unsupported maxval '65535'") != std::string::npos);
}

TEST_CASE("cli: synth, disparity and eval")
{
    make_pair();
    const Run d = run("disparity --left l.pgm --right r.pgm --num-disparities 8 --out d.pfm");
    REQUIRE(d.code == 0);
    CHECK(d.out.find("size: 40x30") != std::string::npos);
    CHECK(d.out.find("valid: ") != std::string::npos);
    CHECK(fs::file_size(work_dir() / "d.pfm") > 40 * 30 * 4);

    const Run self = run("eval --pred gt.pfm --gt gt.pfm");
    REQUIRE(self.code == 0);
    CHECK(self.out == "0.000000,inf,1.000000\n");

    const Run e = run("eval --pred d.pfm --gt gt.pfm --d-max 7");
    REQUIRE(e.code == 0);
    CHECK(std::count(e.out.begin(), e.out.end(), ',') == 2);
}

TEST_CASE("cli: parameter repair warning")
{
    make_pair();
    std::ofstream(work_dir() / "p.json") << R"({"alpha": 30, "beta": 10, "num_disparities": 8})";
    const Run r = run("disparity --left l.pgm --right r.pgm --params p.json --out d.pfm");
    CHECK(r.code == 0);
    CHECK(r.err.find("repaired to 31") != std::string::npos);

    std::ofstream(work_dir() / "q.json") << R"({"alpah": 30})";
    CHECK(run("disparity --left l.pgm --right r.pgm --params q.json --out d.pfm").code == 2);
}

TEST_CASE("cli: optimize is reproducible for a fixed seed")
{
    make_pair();
    const std::string common = "optimize --left l.pgm --right r.pgm --gt gt.pfm --metric psnr "
                               "--gens 3 --pop 8 --seed 11 --num-disparities 8 ";
    const Run a = run("--workers 1 " + common + "--log h1.csv --out p1.json");
    REQUIRE(a.code == 0);
    const Run b = run("--workers 3 " + common + "--log h2.csv --out p2.json");
    REQUIRE(b.code == 0);
    CHECK(slurp(work_dir() / "h1.csv") == slurp(work_dir() / "h2.csv"));
    CHECK(slurp(work_dir() / "p1.json") == slurp(work_dir() / "p2.json"));
    CHECK(a.out == b.out);
    CHECK(a.out.find("metric: psnr") != std::string::npos);
    const std::string log = slurp(work_dir() / "h1.csv");
    CHECK(std::count(log.begin(), log.end(), '\n') == 5); // header + 4 rows
}
