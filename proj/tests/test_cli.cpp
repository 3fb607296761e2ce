#include "cli.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace swsynth;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(SWSYNTH_FIXTURES) + "/" + name; }

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "swsynth-cli-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "swsynth");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("synth-indirect") {
    const auto out = scratch("indirect");
    CHECK(run({"synth-indirect", "--model", fixture("boost1.model"), "--out", out.string()}) == kExitOk);
    for (const char* f : {"graph.txt", "graph.dot", "patterns.txt", "certificate.txt", "report.txt"}) {
        CHECK(fs::exists(out / f));
    }
    CHECK_THAT(slurp(out / "report.txt"), ContainsSubstring("winning 63"));
    CHECK_THAT(slurp(out / "certificate.txt"), ContainsSubstring("uncertified"));

    const auto fine = scratch("indirect-fine");
    CHECK(run({"synth-indirect", "--model", fixture("boost1.model"), "--grid-step", "1/40", "--out", fine.string()}) ==
          kExitOk);
    CHECK_THAT(slurp(fine / "patterns.txt"), ContainsSubstring("12121212122\n"));

    CHECK(run({"synth-indirect", "--model", fixture("identity.model"), "--out", out.string()}) == kExitOk);
    CHECK_THAT(slurp(out / "report.txt"), ContainsSubstring("nodes 63\nwinning 63"));

    // eta larger than half of V's width leaves no lattice point inside V.
    CHECK(run({"synth-indirect", "--model", fixture("boost1.model"), "--eta", "0.7", "--lower", "3.01,1.51", "--upper",
               "3.39,1.79", "--out", out.string()}) == kExitUsage);
    CHECK(run({"synth-indirect", "--model", fixture("translate.model"), "--out", out.string()}) == kExitEmpty);
}

TEST_CASE("synth-direct, verify and simulate") {
    const auto out = scratch("direct");
    CHECK(run({"synth-direct", "--model", fixture("boost1.model"), "--cells", "200", "--out", out.string()}) == kExitOk);
    CHECK(fs::exists(out / "subspace.txt"));
    CHECK(fs::exists(out / "regions.svg"));
    CHECK_THAT(slurp(out / "report.txt"), ContainsSubstring("zones 2\n"));
    const std::string subspace = (out / "subspace.txt").string();

    const auto v = scratch("verify");
    CHECK(run({"verify", "--model", fixture("boost1.model"), "--subspace", subspace, "--out", v.string()}) == kExitOk);

    // Append one cell from the lower-left uncontrollable corner to Control_1.
    std::string text = slurp(subspace);
    const auto at = text.find("control 1 runs ");
    const auto eol = text.find('\n', at);
    const auto count = std::stoul(text.substr(at + 15, eol - at - 15));
    text.replace(at, eol - at, "control 1 runs " + std::to_string(count + 1) + "\n0 1");
    const fs::path corrupt = v / "corrupt.txt";
    std::ofstream(corrupt) << text;
    CHECK(run({"verify", "--model", fixture("boost1.model"), "--subspace", corrupt.string(), "--out", v.string()}) ==
          kExitCheckFailed);

    std::ofstream(v / "garbage.txt") << "not a subspace\n";
    CHECK(run({"verify", "--model", fixture("boost1.model"), "--subspace", (v / "garbage.txt").string(), "--out",
               v.string()}) == kExitUsage);
    CHECK(run({"verify", "--model", fixture("boost1.model"), "--subspace", (v / "missing.txt").string(), "--out",
               v.string()}) == kExitUsage);

    const auto s = scratch("simulate");
    CHECK(run({"simulate", "--model", fixture("boost1.model"), "--subspace", subspace, "--x0", "3.01,1.79", "--steps",
               "1000", "--out", s.string()}) == kExitOk);
    CHECK(slurp(s / "trajectory.csv").rfind("t,mode,x1,x2\n", 0) == 0);
    CHECK_THAT(slurp(s / "report.txt"), ContainsSubstring("completed yes"));
    CHECK(run({"simulate", "--model", fixture("boost1.model"), "--subspace", subspace, "--x0", "3,1.5", "--out",
               s.string()}) == kExitUsage);
}

TEST_CASE("simulate with a pattern") {
    const auto s = scratch("pattern");
    const std::vector<std::string> base{"simulate",      "--model", fixture("boost1.model"), "--pattern", "12121212122",
                                        "--x0",          "3,1.79",  "--steps",               "200",       "--out",
                                        s.string()};
    auto with = [&](std::vector<std::string> extra) {
        auto a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return run(a);
    };
    CHECK(with({"--epsilon", "0"}) == kExitCheckFailed);
    CHECK(with({"--epsilon", "3.0"}) == kExitOk);
    CHECK(with({"--epsilon", "13/5"}) == kExitOk);
    CHECK(with({}) == kExitOk);  // epsilon from the model file
    CHECK(with({"--pattern", "123"}) == kExitUsage);
}

TEST_CASE("closed loop failure exit code") {
    const auto out = scratch("noSafe");
    const auto model = out / "drift.model";
    std::ofstream(model) << "dimension: 2\ntau: 1/2\nmodes: 1\nmode 1\nA:\n0 0\n0 0\nb:\n1 0\n"
                            "box:\nlower: 3 1.5\nupper: 3.4 1.8\n";
    std::ofstream(out / "all.txt") << "swsynth-subspace 1\ndimension 2\nlower 3 1.5\nupper 3.4 1.8\ncells 2 2\n"
                                      "modes 1\niterations 1\nconverged 1\ncontrol 1 runs 1\n0 4\nend\n";
    CHECK(run({"simulate", "--model", model.string(), "--subspace", (out / "all.txt").string(), "--x0", "3.1,1.6",
               "--out", out.string()}) == kExitNoSafeMode);
}

TEST_CASE("direct method edge cases") {
    const auto out = scratch("direct-edge");
    CHECK(run({"synth-direct", "--model", fixture("translate.model"), "--out", out.string()}) == kExitEmpty);
    CHECK(run({"synth-direct", "--model", fixture("identity.model"), "--out", out.string()}) == kExitOk);
    CHECK(run({"verify", "--model", fixture("identity.model"), "--subspace", (out / "subspace.txt").string(), "--out",
               out.string()}) == kExitOk);
    CHECK(run({"synth-direct", "--model", fixture("identity.model"), "--delta", "0", "--out", out.string()}) ==
          kExitUsage);
}

TEST_CASE("usage errors") {
    const auto out = scratch("usage");
    CHECK(run({}) == kExitUsage);
    CHECK(run({"bogus"}) == kExitUsage);
    CHECK(run({"synth-indirect"}) == kExitUsage);
    CHECK(run({"synth-indirect", "--model", fixture("nope.model"), "--out", out.string()}) == kExitUsage);
    CHECK(run({"synth-indirect", "--model", fixture("boost1.model"), "--eta", "x", "--out", out.string()}) == kExitUsage);
    std::ofstream(out / "notau.model") << "dimension: 1\nmodes: 1\nmode 1\nA:\n0\nb:\n1\n";
    CHECK(run({"synth-indirect", "--model", (out / "notau.model").string(), "--eta", "0.1", "--out", out.string()}) ==
          kExitUsage);
    CHECK(run({"simulate", "--model", fixture("boost1.model"), "--x0", "3,1.7", "--out", out.string()}) == kExitUsage);
    CHECK(run({"--help"}) == kExitOk);
}

TEST_CASE("artifacts are deterministic") {
    const auto a = scratch("det-a");
    const auto b = scratch("det-b");
    for (const auto& dir : {a, b}) {
        REQUIRE(run({"synth-indirect", "--model", fixture("boost1.model"), "--eta", "1/80", "--out", dir.string()}) ==
                kExitOk);
        REQUIRE(run({"synth-direct", "--model", fixture("boost1.model"), "--cells", "100", "--threads",
                     dir == a ? "1" : "3", "--out", dir.string()}) == kExitOk);
    }
    for (const char* f : {"graph.txt", "graph.dot", "patterns.txt", "certificate.txt", "subspace.txt", "regions.svg",
                          "report.txt"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
}
