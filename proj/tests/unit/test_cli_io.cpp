#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "besovtree/cli.hpp"
#include "besovtree/errors.hpp"
#include "besovtree/io.hpp"
#include "besovtree/restore.hpp"
#include "besovtree/tree_prior.hpp"
#include "helpers.hpp"

using namespace besovtree;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "besovtree");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

double best_beta(const std::string& out) {
    const auto at = out.find("best_beta=");
    REQUIRE(at != std::string::npos);
    return std::stod(out.substr(at + 10));
}

}  // namespace

TEST_CASE("csv round trip") {
    testutil::TempDir dir("csv");
    std::mt19937_64 rng(1);
    const auto one = DyadicSignal::from_1d(testutil::random_vector(32, rng));
    io::write_csv(dir / "a.csv", one);
    CHECK(io::read_csv(dir / "a.csv").values == one.values);

    const auto two = DyadicSignal::from_2d(8, testutil::random_vector(64, rng));
    io::write_csv(dir / "b.csv", two);
    const auto back = io::read_csv(dir / "b.csv");
    CHECK(back.dim == 2);
    CHECK(back.values == two.values);

    spit(dir / "row.csv", "1,2,3,4\n");
    CHECK(io::read_csv(dir / "row.csv").values == std::vector<double>{1, 2, 3, 4});
    spit(dir / "bad.csv", "1\n2\nabc\n4\n");
    CHECK_THROWS_AS(io::read_csv(dir / "bad.csv"), IoError);
    spit(dir / "odd.csv", "1\n2\n3\n");
    CHECK_THROWS_AS(io::read_csv(dir / "odd.csv"), DimensionError);
    CHECK_THROWS_AS(io::read_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("pgm round trip") {
    testutil::TempDir dir("pgm");
    const auto img = synthetic_image(4);
    for (int maxval : {255, 65535}) {
        for (bool ascii : {false, true}) {
            const auto path = dir / ("x" + std::to_string(maxval) + (ascii ? "a" : "b") + ".pgm");
            io::write_pgm(path, img, maxval, ascii);
            const auto back = io::read_pgm(path);
            REQUIRE(back.values.size() == img.values.size());
            CHECK(testutil::max_abs_diff(back.values, img.values) <= 0.5 / maxval + 1e-12);
            io::write_pgm(dir / "again.pgm", back, maxval, ascii);
            CHECK(slurp(dir / "again.pgm") == slurp(path));
        }
    }
    spit(dir / "c.pgm", "P2\n# comment\n2 2\n# another\n4\n0 1\n2 4\n");
    CHECK(io::read_pgm(dir / "c.pgm").values == std::vector<double>{0, 0.25, 0.5, 1});
    spit(dir / "rect.pgm", "P2\n4 2\n255\n0 0 0 0 0 0 0 0\n");
    CHECK_THROWS_AS(io::read_pgm(dir / "rect.pgm"), DimensionError);
    spit(dir / "short.pgm", "P5\n4 4\n255\nabc");
    CHECK_THROWS_AS(io::read_pgm(dir / "short.pgm"), IoError);
    spit(dir / "magic.pgm", "P6\n2 2\n255\n");
    CHECK_THROWS_AS(io::read_pgm(dir / "magic.pgm"), IoError);
}

TEST_CASE("json round trips are byte-identical") {
    std::mt19937_64 rng(2);
    const auto noisy = add_gaussian_noise(synthetic_image(4), 0.05, 3);
    const auto out = denoise(noisy, DenoiseConfig::automatic(10.0));

    const json pj = io::to_json(out.prune);
    CHECK(io::dump(json::parse(io::dump(pj))) == io::dump(pj));
    CHECK(io::mask_from_json(io::to_json(out.prune.mask)) == out.prune.mask);

    const auto pyr = forward_dwt(noisy, WaveletBasis::make(WaveletFamily::Daubechies2));
    const auto back = io::pyramid_from_json(io::to_json(pyr));
    CHECK(back.details == pyr.details);
    CHECK(back.scaling == pyr.scaling);
    CHECK(back.family == pyr.family);
    CHECK(io::dump(io::to_json(back)) == io::dump(io::to_json(pyr)));

    auto report = evaluate(out.signal, synthetic_image(4));
    report.beta_hat = out.prune.beta_hat;
    const json rj = io::to_json(report);
    CHECK(io::dump(json::parse(io::dump(rj))) == io::dump(rj));
    CHECK(rj.contains("ssim"));

    CHECK_THROWS(io::mask_from_json(json{{"J", 2}}));
}

TEST_CASE("denoise command") {
    testutil::TempDir dir("denoise");
    const auto clean = blocks_signal(10);
    auto scaled = clean;
    for (double& v : scaled.values) v *= 5.0 / signal_sd(clean);
    io::write_csv(dir / "clean.csv", scaled);
    io::write_csv(dir / "blocks.csv", add_gaussian_noise(scaled, 1.0, 5));
    const auto input = (dir / "blocks.csv").string();

    const auto r = run_cli({"denoise", "--input", input, "--reference", (dir / "clean.csv").string(), "--wavelet", "haar",
                        "--prior", "gaussian", "--auto-beta", "--a", "100", "--output", (dir / "out.csv").string()});
    REQUIRE(r.code == 0);
    CHECK(std::filesystem::exists(dir / "out.csv"));
    const auto prune = io::read_json(dir / "out.prune.json");
    CHECK(prune["beta_hat"].is_array());
    const auto metrics = io::read_json(dir / "out.metrics.json");
    CHECK(metrics["rel_error"].get<double>() > 0.0);

    const auto f = run_cli({"denoise", "--input", input, "--beta", "1e-4", "--prune-json", (dir / "fixed.json").string()});
    REQUIRE(f.code == 0);
    CHECK(io::read_json(dir / "fixed.json")["beta_hat"].is_null());

    CHECK(run_cli({"denoise", "--input", (dir / "nope.csv").string()}).code == 2);
    const auto usage = run_cli({"denoise", "--input", input, "--beta", "0.7"});
    CHECK(usage.code == 2);
    CHECK_FALSE(usage.err.empty());
    CHECK(run_cli({"denoise", "--bogus"}).code == 2);
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"denoise", "--input", input, "--wavelet", "sym8"}).code == 2);
}

TEST_CASE("sweep-beta command") {
    testutil::TempDir dir("sweep");
    auto clean = blocks_signal(9);
    for (double& v : clean.values) v *= 5.0 / signal_sd(blocks_signal(9));
    io::write_csv(dir / "clean.csv", clean);
    const auto ref = (dir / "clean.csv").string();

    // noiseless input: the largest grid point wins
    const auto exact = run_cli({"sweep-beta", "--input", ref, "--reference", ref, "--grid-size", "6", "--refine", "2"});
    REQUIRE(exact.code == 0);
    CHECK(best_beta(exact.out) == beta_grid(6, 2).back());

    const auto single = run_cli({"sweep-beta", "--input", ref, "--reference", ref, "--grid-size", "1", "--refine", "0"});
    REQUIRE(single.code == 0);
    CHECK(best_beta(single.out) == 0.49);

    // best-beta error equals a denoise run at that beta
    io::write_csv(dir / "noisy.csv", add_gaussian_noise(clean, 1.0, 6));
    const auto noisy = (dir / "noisy.csv").string();
    const auto sweep = run_cli({"sweep-beta", "--input", noisy, "--reference", ref, "--grid-size", "12"});
    REQUIRE(sweep.code == 0);
    const auto line = sweep.out.substr(sweep.out.find("best_beta="));
    std::istringstream fields(line);
    std::string beta_field, err_field;
    fields >> beta_field >> err_field;
    const std::string beta = beta_field.substr(beta_field.find('=') + 1);
    const double swept = std::stod(err_field.substr(err_field.find('=') + 1));
    const auto den = run_cli({"denoise", "--input", noisy, "--reference", ref, "--beta", beta, "--metrics-json",
                          (dir / "m.json").string()});
    REQUIRE(den.code == 0);
    CHECK(io::read_json(dir / "m.json")["rel_error"].get<double>() == doctest::Approx(swept).epsilon(1e-12));

    CHECK(run_cli({"sweep-beta", "--input", noisy}).code == 2);
}

TEST_CASE("benchmark command") {
    testutil::TempDir dir("bench");
    const std::vector<std::string> args{"benchmark", "--builtin", "image", "--depth", "5", "--noise-pct", "7",
                                        "--seed", "4", "--grid-size", "6", "--refine", "1"};
    auto a1 = args, a2 = args;
    a1.insert(a1.end(), {"--output", (dir / "a.json").string()});
    a2.insert(a2.end(), {"--output", (dir / "b.json").string()});
    const auto r1 = run_cli(a1), r2 = run_cli(a2);
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    const auto j = io::read_json(dir / "a.json");
    REQUIRE(j["rows"].size() == 7);
    const std::vector<std::string> methods{"noisy", "tree-fixed-gaussian", "tree-auto-gaussian", "tree-fixed-laplace",
                                           "tree-auto-laplace", "soft-threshold", "hard-threshold"};
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(j["rows"][i]["method"] == methods[i]);
        CHECK(j["rows"][i]["ssim"].is_number());
    }
    for (const auto& m : methods) CHECK(r1.out.find(m) != std::string::npos);
}

TEST_CASE("sample-prior command") {
    testutil::TempDir dir("sample");
    const auto r = run_cli({"sample-prior", "--depth", "6", "--beta", "0", "--seed", "3", "--output",
                        (dir / "f.csv").string(), "--pyramid-output", (dir / "p.json").string()});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["nonzero_details"] == 1);
    CHECK(io::mask_from_json(io::read_json(dir / "f.mask.json")) == TreeMask::root_only(1, 6));

    const auto again = run_cli({"sample-prior", "--depth", "6", "--beta", "0", "--seed", "3", "--output",
                            (dir / "g.csv").string()});
    CHECK(slurp(dir / "f.csv") == slurp(dir / "g.csv"));

    const auto full = run_cli({"sample-prior", "--depth", "7", "--beta", "1", "--kappa", "1", "--p", "2", "--s", "1",
                           "--seed", "8", "--output", (dir / "h.csv").string(), "--pyramid-output",
                           (dir / "hp.json").string()});
    REQUIRE(full.code == 0);
    const double reported = json::parse(full.out)["besov_norm"].get<double>();
    const auto pyr = io::pyramid_from_json(io::read_json(dir / "hp.json"));
    CHECK(reported == besov_norm(pyr, 1.0, 2.0));

    CHECK(run_cli({"sample-prior", "--p", "0.5"}).code == 2);
    CHECK(run_cli({"sample-prior", "--beta", "0.1,0.2", "--depth", "5"}).code == 2);
}

TEST_CASE("deconvolve command") {
    testutil::TempDir dir("deconv");
    const auto r = run_cli({"deconvolve", "--builtin", "blocks", "--depth", "8", "--simulate", "--iters", "3",
                        "--output", (dir / "d.csv").string(), "--metrics-json", (dir / "m.json").string()});
    REQUIRE(r.code == 0);
    CHECK(io::read_csv(dir / "d.csv").values.size() == 512);
    CHECK(std::filesystem::exists(dir / "m.json"));
    CHECK(run_cli({"deconvolve", "--builtin", "blocks", "--kernel", "1,2"}).code == 2);
}
