#include "netfolio/error.hpp"
#include "netfolio/pipeline.hpp"
#include "netfolio/pmfg.hpp"

#include "oracles.hpp"

#include <doctest.h>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <sys/wait.h>

using namespace netfolio;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& tag)
    {
        path = fs::temp_directory_path() / fmt::format("netfolio_{}_{}", tag, ::getpid());
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree_hashes(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            out[fs::relative(e.path(), root).string()] = hash_file(e.path());
        }
    }
    return out;
}

PipelineConfig small_config(const fs::path& out)
{
    KeyValues kv{{"out", out.string()},  {"window", "300"}, {"step", "100"},     {"trials", "5"},
                 {"m", "4"},             {"samples", "3"},  {"m_grid", "2,4,6"}, {"synthetic.length", "800"},
                 {"threads", "1"}};
    return PipelineConfig::from_key_values(kv);
}

int run_cli(const std::string& args)
{
    const int status = std::system(fmt::format("\"{}\" {} >/dev/null 2>&1", NETFOLIO_CLI, args).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing: defaults, overrides, prefixes and tail reading")
{
    const auto d = PipelineConfig::from_key_values({});
    CHECK(d.tail == 0.05);
    CHECK(PipelineConfig::from_key_values({{"alpha_reading", "literal"}}).tail == 0.05);
    CHECK(d.m == 30);
    CHECK(d.m_grid.front() == 5);
    CHECK(d.m_grid.back() == 60);
    CHECK(d.window.width == 500);
    CHECK(d.window.step == 25);

    auto c = PipelineConfig::from_key_values({{"alpha", "0.99"}});
    CHECK(c.tail == doctest::Approx(0.01));
    c = PipelineConfig::from_key_values({{"alpha", "0.05"}, {"alpha_reading", "literal"}});
    CHECK(c.tail == doctest::Approx(0.05));
    c = PipelineConfig::from_key_values({{"alpha", "0.99"}, {"tail", "0.1"}});
    CHECK(c.tail == doctest::Approx(0.1));
    c = PipelineConfig::from_key_values({{"synthetic.n_assets", "12"}, {"synthetic.n_blocks", "3"}, {"seed", "9"}});
    CHECK(c.synthetic.n_assets == 12);
    CHECK(c.synthetic.n_blocks == 3);
    CHECK(c.synthetic.seed == 9);
    CHECK_THROWS_AS(PipelineConfig::from_key_values({{"windw", "3"}}), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_key_values({{"tail", "1.5"}}).validate(), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_key_values({{"modes", "both"}}).validate(), ConfigError);

    TempDir dir("cfg");
    std::ofstream(dir.path / "run.cfg") << "# experiment\nwindow = 300\nm = 5\n";
    const auto loaded = load_config(dir.path / "run.cfg", {{"m", "7"}});
    CHECK(loaded.window.width == 300);
    CHECK(loaded.m == 7);
    CHECK_THROWS_AS(load_config(dir.path / "missing.cfg", {}), ConfigError);
}

TEST_CASE("format_number round-trips and writes NA")
{
    CHECK(format_number(std::nan("")) == "NA");
    for (const double x : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125}) {
        CHECK(std::stod(format_number(x)) == x);
    }
}

TEST_CASE("stages need their upstream manifests")
{
    TempDir dir("stage");
    const auto cfg = small_config(dir.path);
    CHECK_THROWS_AS(cmd_correlate(cfg), StageError);
    CHECK_THROWS_AS(cmd_analyze(cfg), StageError);
    CHECK_THROWS_AS(cmd_portfolio(cfg), StageError);
}

TEST_CASE("synthetic stage: labels file and identical bytes for a fixed seed")
{
    TempDir dir("synth");
    const auto cfg = small_config(dir.path);
    cmd_synthetic(cfg);
    const auto labels = slurp(dir.path / "synthetic" / "labels.csv");
    std::istringstream in(labels);
    std::string line;
    std::getline(in, line);
    CHECK(line == "ticker,block");
    int rows = 0;
    std::set<std::string> blocks;
    while (std::getline(in, line)) {
        ++rows;
        blocks.insert(line.substr(line.find(',') + 1));
    }
    CHECK(rows == 32);
    CHECK(blocks.size() == 4);
    const auto before = slurp(dir.path / "synthetic" / "returns.csv");
    fs::remove_all(dir.path / "synthetic");
    cmd_synthetic(cfg);
    CHECK(slurp(dir.path / "synthetic" / "returns.csv") == before);
}

TEST_CASE("paper-scale schedule: 4025 returns, width 500, step 25 gives 142 windows")
{
    TempDir dir("w142");
    KeyValues kv{{"out", dir.path.string()}, {"synthetic.length", "4025"}, {"synthetic.n_assets", "8"},
                 {"synthetic.n_blocks", "2"}, {"window", "500"},          {"step", "25"}};
    const auto cfg = PipelineConfig::from_key_values(kv);
    cmd_synthetic(cfg);
    const auto r = cmd_correlate(cfg);
    CHECK(r.warnings.empty());
    const auto m = nlohmann::json::parse(slurp(dir.path / "correlate" / "manifest.json"));
    CHECK(m.at("n_windows") == 142);
    CHECK(m.at("windows").size() == 142);
    CHECK(m.at("windows").back().at("start") == 141 * 25);
}

TEST_CASE("end-to-end run: planar graphs, community counts, marked cells, byte-identical reruns")
{
    TempDir dir("e2e");
    const auto cfg = small_config(dir.path);
    const auto first = cmd_run_all(cfg);
    REQUIRE(first.size() == 4);
    const auto before = tree_hashes(dir.path);

    const auto analyze = nlohmann::json::parse(slurp(dir.path / "analyze" / "manifest.json"));
    CHECK(analyze.at("n_windows") == 6);
    const double mean_nc = analyze.at("mean_n_c").get<double>();
    CHECK(mean_nc >= 3.5);
    CHECK(mean_nc <= 4.5);
    for (const auto& w : analyze.at("windows")) {
        const auto g = graph_from_json(nlohmann::json::parse(slurp(dir.path / "analyze" / w.at("graph").get<std::string>())));
        CHECK(g.n_edges() == 3 * (32 - 2));
        CHECK(oracle::boost_planar(g));
    }

    const auto size = slurp(dir.path / "portfolio" / "es_vs_size.csv");
    CHECK(size.find("6,inter,NA") != std::string::npos);
    const auto portfolio = nlohmann::json::parse(slurp(dir.path / "portfolio" / "manifest.json"));
    CHECK(portfolio.at("inter_ceiling") == 4);

    // Cached rerun touches nothing; a forced rerun reproduces every byte.
    for (const auto& r : cmd_run_all(cfg)) {
        CHECK(r.status == StageStatus::Cached);
    }
    CHECK(tree_hashes(dir.path) == before);
    for (const char* stage : {"synthetic", "correlate", "analyze", "portfolio"}) {
        fs::remove(dir.path / stage / "manifest.json");
    }
    for (const auto& r : cmd_run_all(cfg)) {
        CHECK(r.status == StageStatus::Ran);
    }
    CHECK(tree_hashes(dir.path) == before);
}

TEST_CASE("a single window puts co-occurrence mass only at counts 0 and 1")
{
    TempDir dir("single");
    KeyValues kv{{"out", dir.path.string()}, {"synthetic.length", "300"}, {"window", "300"}, {"trials", "3"}};
    const auto cfg = PipelineConfig::from_key_values(kv);
    cmd_synthetic(cfg);
    cmd_correlate(cfg);
    cmd_analyze(cfg);
    std::istringstream in(slurp(dir.path / "analyze" / "cooccurrence_hist.csv"));
    std::string line;
    std::getline(in, line);
    long long total = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        const int count = std::stoi(line.substr(0, comma));
        const long long pairs = std::stoll(line.substr(comma + 1));
        CHECK((count <= 1 || pairs == 0));
        total += pairs;
    }
    CHECK(total == 32 * 31 / 2);
}

TEST_CASE("command-line exit codes")
{
    TempDir dir("cli");
    const auto out = dir.path.string();
    CHECK(run_cli(fmt::format("synthetic --out {} --seed 3", out)) == 0);
    CHECK(run_cli(fmt::format("analyze --out {}", out)) == 4);
    CHECK(run_cli(fmt::format("correlate --out {} --window 5000", out)) == 3);
    CHECK_FALSE(fs::exists(dir.path / "correlate"));
    std::ofstream(dir.path / "bad.cfg") << "window = often\n";
    CHECK(run_cli(fmt::format("correlate --config {}/bad.cfg --out {}", out, out)) == 2);
    CHECK(run_cli("correlate --bogus") == 2);
}
