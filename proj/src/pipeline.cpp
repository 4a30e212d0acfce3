#include "netfolio/pipeline.hpp"

#include "netfolio/community.hpp"
#include "netfolio/error.hpp"
#include "netfolio/parallel.hpp"
#include "netfolio/pmfg.hpp"
#include "netfolio/portfolio.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace netfolio {

namespace {

const std::set<std::string> known_keys{
    "input",   "input_kind", "layout",       "min_coverage", "window",   "step",       "trials",
    "seed",    "modes",      "m",            "m_grid",       "tail",     "alpha",      "alpha_reading",
    "samples", "size_samples", "q_points",   "risk_bins",    "plot_data", "threads",   "out",
};

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, v));
}

std::string hex(std::uint64_t h)
{
    return fmt::format("{:016x}", h);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path)
{
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw DataError(fmt::format("{} is not valid JSON: {}", path.string(), e.what()));
    }
}

std::string dump(const json& j)
{
    return j.dump(1) + "\n";
}

fs::path stage_dir(const PipelineConfig& cfg, const std::string& stage)
{
    return cfg.out / stage;
}

/// Manifest of a completed upstream stage, or StageError naming it.
json require_stage(const PipelineConfig& cfg, const std::string& stage, const std::string& by)
{
    const auto path = stage_dir(cfg, stage) / "manifest.json";
    if (!fs::exists(path)) {
        throw StageError(fmt::format("{} needs the '{}' stage, which has no manifest at {}; run '{}' first", by,
                                     stage, path.string(), stage));
    }
    return read_json(path);
}

bool is_cached(const fs::path& dir, const std::string& key)
{
    const auto path = dir / "manifest.json";
    if (!fs::exists(path)) {
        return false;
    }
    json m;
    try {
        m = json::parse(read_file(path));
    } catch (const json::exception&) {
        return false;
    }
    if (!m.contains("key") || m["key"] != key || !m.contains("files")) {
        return false;
    }
    for (const auto& f : m["files"]) {
        if (!fs::exists(dir / f.get<std::string>())) {
            return false;
        }
    }
    return true;
}

void reset_dir(const fs::path& dir)
{
    fs::remove_all(dir);
    fs::create_directories(dir);
}

std::string window_file(const char* prefix, std::size_t id, const char* ext)
{
    return fmt::format("{}_{:04d}.{}", prefix, id, ext);
}

template <typename Writer>
std::string render(Writer&& w)
{
    std::ostringstream ss;
    w(ss);
    return ss.str();
}

std::string settings_key(const json& settings, const std::vector<std::string>& upstream)
{
    std::string blob = settings.dump();
    for (const auto& u : upstream) {
        blob += '\n';
        blob += u;
    }
    return hex(fnv1a(blob));
}

struct ResolvedInput {
    fs::path path;
    std::string kind;
};

ResolvedInput resolve_input(const PipelineConfig& cfg)
{
    if (!cfg.input.empty()) {
        if (!fs::exists(cfg.input)) {
            throw DataError("input file not found: " + cfg.input.string());
        }
        return {cfg.input, cfg.input_kind};
    }
    require_stage(cfg, "synthetic", "correlate (no input configured)");
    return {stage_dir(cfg, "synthetic") / "returns.csv", "returns"};
}

std::vector<Window> manifest_windows(const json& correlate)
{
    std::vector<Window> out;
    for (const auto& w : correlate.at("windows")) {
        out.push_back(Window{w.at("id").get<std::size_t>(), w.at("start").get<std::size_t>(),
                             w.at("end").get<std::size_t>()});
    }
    return out;
}

Partition read_partition_csv(const fs::path& path, const PlanarGraph& g)
{
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line);
    if (trim(line) != "ticker,community") {
        throw DataError(path.string() + ": unexpected header");
    }
    std::vector<int> labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != 2 || row >= g.n_nodes() || trim(cells[0]) != g.label(static_cast<int>(row))) {
            throw DataError(fmt::format("{}: row {} does not match the graph's node order", path.string(), row + 1));
        }
        labels.push_back(std::stoi(cells[1]));
        ++row;
    }
    if (row != g.n_nodes()) {
        throw DataError(path.string() + ": partition does not cover every node");
    }
    return Partition::from_labels(labels);
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h)
{
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_file(const fs::path& path)
{
    return hex(fnv1a(read_file(path)));
}

void write_atomic(const fs::path& path, const std::string& contents)
{
    const auto tmp = fs::path(path).concat(".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write " + tmp.string());
        }
        out << contents;
        if (!out.flush()) {
            throw DataError("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

std::string format_number(double x)
{
    return std::isnan(x) ? "NA" : fmt::format("{}", x);
}

PipelineConfig PipelineConfig::from_key_values(const KeyValues& kv)
{
    KeyValues synth;
    for (const auto& [key, value] : kv) {
        if (key.rfind("synthetic.", 0) == 0) {
            synth[key.substr(10)] = value;
        } else if (!known_keys.count(key)) {
            throw ConfigError(fmt::format("unknown configuration key '{}'", key));
        }
    }
    PipelineConfig c;
    c.input = kv_string(kv, "input", "");
    c.input_kind = kv_string(kv, "input_kind", c.input_kind);
    try {
        c.layout = parse_layout(kv_string(kv, "layout", "wide"));
    } catch (const Error& e) {
        throw ConfigError(std::string("layout: ") + e.what());
    }
    c.min_coverage = kv_double(kv, "min_coverage", c.min_coverage);
    c.window.width = static_cast<int>(kv_int(kv, "window", c.window.width));
    c.window.step = static_cast<int>(kv_int(kv, "step", c.window.step));
    c.trials = static_cast<int>(kv_int(kv, "trials", c.trials));
    c.seed = static_cast<std::uint64_t>(kv_int(kv, "seed", static_cast<long long>(c.seed)));
    if (kv.count("modes")) {
        c.modes.clear();
        for (const auto& m : split(kv.at("modes"), ',')) {
            c.modes.push_back(trim(m));
        }
    }
    c.m = static_cast<int>(kv_int(kv, "m", c.m));
    c.m_grid = kv_int_list(kv, "m_grid", c.m_grid);

    const auto reading = kv_string(kv, "alpha_reading", "confidence");
    if (reading != "confidence" && reading != "literal") {
        throw ConfigError(fmt::format("alpha_reading must be confidence or literal, got '{}'", reading));
    }
    if (kv.count("tail")) {
        c.tail = kv_double(kv, "tail", c.tail);
    } else if (kv.count("alpha")) {
        const double alpha = kv_double(kv, "alpha", 0.95);
        c.tail = reading == "literal" ? alpha : 1.0 - alpha;
    }
    c.samples = static_cast<int>(kv_int(kv, "samples", c.samples));
    c.size_samples = static_cast<int>(kv_int(kv, "size_samples", c.samples));
    c.q_points = static_cast<int>(kv_int(kv, "q_points", c.q_points));
    c.risk_bins = static_cast<int>(kv_int(kv, "risk_bins", c.risk_bins));
    c.plot_data = kv.count("plot_data") ? to_bool("plot_data", kv.at("plot_data")) : false;
    const auto threads = kv_int(kv, "threads", 0);
    if (threads < 0) {
        throw ConfigError("threads must be non-negative");
    }
    c.threads = static_cast<unsigned>(threads);
    c.out = kv_string(kv, "out", c.out.string());

    if (!synth.count("seed")) {
        synth["seed"] = std::to_string(c.seed);
    }
    try {
        c.synthetic = SyntheticMarketSpec::from_key_values(synth);
    } catch (const Error& e) {
        throw ConfigError(std::string("synthetic market: ") + e.what());
    }
    c.validate();
    return c;
}

void PipelineConfig::validate() const
{
    if (input_kind != "prices" && input_kind != "returns") {
        throw ConfigError(fmt::format("input_kind must be prices or returns, got '{}'", input_kind));
    }
    if (!(min_coverage > 0.0 && min_coverage <= 1.0)) {
        throw ConfigError(fmt::format("min_coverage must lie in (0, 1], got {}", min_coverage));
    }
    window.validate();
    if (trials < 1) {
        throw ConfigError("trials must be at least 1");
    }
    if (modes.empty()) {
        throw ConfigError("at least one portfolio mode is required");
    }
    for (const auto& m : modes) {
        parse_mode(m);
    }
    if (m < 1) {
        throw ConfigError("m must be at least 1");
    }
    if (m_grid.empty() || m_grid.front() < 1 || !std::is_sorted(m_grid.begin(), m_grid.end())
        || std::adjacent_find(m_grid.begin(), m_grid.end()) != m_grid.end()) {
        throw ConfigError("m_grid must be a strictly ascending list of positive sizes");
    }
    if (!(tail > 0.0 && tail <= 1.0)) {
        throw ConfigError(fmt::format("tail must lie in (0, 1], got {}", tail));
    }
    if (samples < 1 || size_samples < 1) {
        throw ConfigError("samples must be at least 1");
    }
    if (q_points < 2) {
        throw ConfigError("q_points must be at least 2");
    }
    if (risk_bins < 1) {
        throw ConfigError("risk_bins must be at least 1");
    }
}

unsigned PipelineConfig::worker_count() const
{
    return threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
}

PipelineConfig load_config(const fs::path& path, const KeyValues& overrides)
{
    KeyValues kv;
    if (!path.empty()) {
        try {
            kv = load_key_values(path);
        } catch (const ParseError& e) {
            throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
        }
    }
    for (const auto& [key, value] : overrides) {
        kv[key] = value;
    }
    return PipelineConfig::from_key_values(kv);
}

StageReport cmd_synthetic(const PipelineConfig& cfg)
{
    const auto& spec = cfg.synthetic;
    const auto dir = stage_dir(cfg, "synthetic");
    const json settings{{"n_assets", spec.n_assets},     {"n_blocks", spec.n_blocks},
                        {"intra_corr", spec.intra_corr}, {"inter_corr", spec.inter_corr},
                        {"length", spec.length},         {"block_means", spec.block_means},
                        {"seed", spec.seed},             {"volatility", spec.volatility},
                        {"shift_at", spec.shift_at},     {"shift_factor", spec.shift_factor}};
    const auto key = settings_key(settings, {});
    StageReport report{"synthetic", StageStatus::Cached, {}};
    if (is_cached(dir, key)) {
        return report;
    }
    const auto panel = generate_synthetic_market(spec);
    reset_dir(dir);
    write_atomic(dir / "returns.csv", render([&](std::ostream& o) { write_return_panel(o, panel); }));
    const auto labels = spec.block_labels();
    write_atomic(dir / "labels.csv", render([&](std::ostream& o) {
                     o << "ticker,block\n";
                     for (std::size_t i = 0; i < panel.tickers.size(); ++i) {
                         o << panel.tickers[i] << ',' << labels[i] << '\n';
                     }
                 }));
    json manifest{{"stage", "synthetic"}, {"key", key}, {"settings", settings},
                  {"files", {"returns.csv", "labels.csv"}}};
    write_atomic(dir / "manifest.json", dump(manifest));
    report.status = StageStatus::Ran;
    return report;
}

StageReport cmd_correlate(const PipelineConfig& cfg)
{
    const auto input = resolve_input(cfg);
    const auto dir = stage_dir(cfg, "correlate");
    const json settings{{"input_kind", input.kind},
                        {"layout", cfg.layout == PanelLayout::Wide ? "wide" : "long"},
                        {"min_coverage", cfg.min_coverage},
                        {"window", cfg.window.width},
                        {"step", cfg.window.step}};
    const auto input_hash = hash_file(input.path);
    const auto key = settings_key(settings, {input_hash});
    StageReport report{"correlate", StageStatus::Cached, {}};
    if (is_cached(dir, key)) {
        return report;
    }

    ReturnPanel returns;
    if (input.kind == "prices") {
        returns = log_returns(align_and_filter(load_price_panel(input.path, cfg.layout), cfg.min_coverage));
    } else {
        returns = load_return_panel(input.path);
    }
    // Validate everything before touching the output directory.
    require_nonsingular(cfg.window, returns.n_assets());
    window_schedule(returns.length(), cfg.window);
    const auto matrices = rolling_correlations(returns, cfg.window, cfg.worker_count());

    reset_dir(dir);
    write_atomic(dir / "returns.csv", render([&](std::ostream& o) { write_return_panel(o, returns); }));
    json files = json::array({"returns.csv"});
    json windows = json::array();
    for (const auto& c : matrices) {
        const auto js = window_file("corr", c.window_id, "json");
        const auto cs = window_file("corr", c.window_id, "csv");
        write_atomic(dir / js, dump(correlation_to_json(c)));
        write_atomic(dir / cs, render([&](std::ostream& o) { write_correlation_csv(o, c); }));
        files.push_back(js);
        files.push_back(cs);
        windows.push_back({{"id", c.window_id}, {"start", c.start}, {"end", c.end},
                           {"start_date", c.start_date}, {"end_date", c.end_date},
                           {"matrix", js}, {"warnings", c.warnings}});
        for (const auto& w : c.warnings) {
            report.warnings.push_back(fmt::format("window {}: {}", c.window_id, w));
        }
    }
    json manifest{{"stage", "correlate"},
                  {"key", key},
                  {"input_hash", input_hash},
                  {"settings", settings},
                  {"n_assets", returns.n_assets()},
                  {"length", returns.length()},
                  {"n_windows", matrices.size()},
                  {"tickers", returns.tickers},
                  {"windows", windows},
                  {"files", files}};
    write_atomic(dir / "manifest.json", dump(manifest));
    report.status = StageStatus::Ran;
    return report;
}

StageReport cmd_analyze(const PipelineConfig& cfg)
{
    const auto upstream = require_stage(cfg, "correlate", "analyze");
    const auto dir = stage_dir(cfg, "analyze");
    const json settings{{"trials", cfg.trials}, {"seed", cfg.seed}, {"plot_data", cfg.plot_data}};
    const auto key = settings_key(settings, {upstream.at("key").get<std::string>()});
    StageReport report{"analyze", StageStatus::Cached, {}};
    if (is_cached(dir, key)) {
        return report;
    }

    const auto& entries = upstream.at("windows");
    const auto n = entries.size();
    const auto src = stage_dir(cfg, "correlate");
    std::vector<PlanarGraph> graphs(n, PlanarGraph(0, {}));
    std::vector<Partition> partitions(n);
    parallel_for(n, cfg.worker_count(), [&](std::size_t k) {
        const auto matrix = correlation_from_json(read_json(src / entries[k].at("matrix").get<std::string>()));
        graphs[k] = build_pmfg(matrix);
        const std::uint64_t seed = fnv1a(fmt::format("{}:{}", cfg.seed, matrix.window_id));
        partitions[k] = detect_communities(graphs[k], DetectOptions{cfg.trials, seed, 200});
    });

    reset_dir(dir);
    json files = json::array();
    json windows = json::array();
    std::string summary = "window_start_date,n_c,Q,codelength\n";
    for (std::size_t k = 0; k < n; ++k) {
        const auto& g = graphs[k];
        const auto& p = partitions[k];
        const auto gj = window_file("graph", g.window_id, "json");
        const auto gc = window_file("graph", g.window_id, "csv");
        const auto pc = window_file("partition", g.window_id, "csv");
        write_atomic(dir / gj, dump(graph_to_json(g)));
        write_atomic(dir / gc, render([&](std::ostream& o) { write_edge_list_csv(o, g); }));
        write_atomic(dir / pc, render([&](std::ostream& o) { write_partition_csv(o, g, p); }));
        files.insert(files.end(), {gj, gc, pc});
        summary += fmt::format("{},{},{},{}\n", g.start_date, p.n_communities, format_number(p.modularity),
                               format_number(p.codelength));
        windows.push_back({{"id", g.window_id}, {"start_date", g.start_date}, {"edges", g.n_edges()},
                           {"n_c", p.n_communities}, {"Q", p.modularity}, {"codelength", p.codelength},
                           {"weight_shift", p.weight_shift}, {"graph", gj}, {"partition", pc}});
    }
    write_atomic(dir / "summary.csv", summary);
    files.push_back("summary.csv");

    const auto table = cooccurrence(partitions);
    const auto hist = table.histogram();
    write_atomic(dir / "cooccurrence_hist.csv", render([&](std::ostream& o) { write_histogram_csv(o, hist); }));
    files.push_back("cooccurrence_hist.csv");
    if (cfg.plot_data) {
        std::string loglog = "log10_count,log10_frequency\n";
        for (std::size_t t = 1; t < hist.size(); ++t) {
            if (hist[t] > 0) {
                loglog += fmt::format("{},{}\n", std::log10(static_cast<double>(t)),
                                      std::log10(static_cast<double>(hist[t])));
            }
        }
        write_atomic(dir / "cooccurrence_loglog.csv", loglog);
        files.push_back("cooccurrence_loglog.csv");
    }

    const auto series = community_count_series(partitions);
    json manifest{{"stage", "analyze"},
                  {"key", key},
                  {"settings", settings},
                  {"n_windows", n},
                  {"mean_n_c", series.mean},
                  {"never_together", hist.front()},
                  {"always_together", hist.back()},
                  {"windows", windows},
                  {"files", files}};
    write_atomic(dir / "manifest.json", dump(manifest));
    report.status = StageStatus::Ran;
    return report;
}

StageReport cmd_portfolio(const PipelineConfig& cfg)
{
    const auto correlate = require_stage(cfg, "correlate", "portfolio");
    const auto analyze = require_stage(cfg, "analyze", "portfolio");
    const auto dir = stage_dir(cfg, "portfolio");
    const json settings{{"modes", cfg.modes},       {"m", cfg.m},
                        {"m_grid", cfg.m_grid},     {"tail", cfg.tail},
                        {"samples", cfg.samples},   {"size_samples", cfg.size_samples},
                        {"q_points", cfg.q_points}, {"risk_bins", cfg.risk_bins},
                        {"seed", cfg.seed},         {"plot_data", cfg.plot_data}};
    const auto key = settings_key(settings, {correlate.at("key").get<std::string>(),
                                             analyze.at("key").get<std::string>()});
    StageReport report{"portfolio", StageStatus::Cached, {}};
    if (is_cached(dir, key)) {
        return report;
    }

    const auto returns = load_return_panel(stage_dir(cfg, "correlate") / "returns.csv");
    const auto windows = manifest_windows(correlate);
    const auto& entries = analyze.at("windows");
    if (entries.size() != windows.size()) {
        throw StageError("analyze output does not cover every correlation window; rerun 'analyze'");
    }
    std::vector<PlanarGraph> graphs;
    std::vector<Partition> partitions;
    const auto src = stage_dir(cfg, "analyze");
    for (std::size_t k = 0; k < windows.size(); ++k) {
        graphs.push_back(graph_from_json(read_json(src / entries[k].at("graph").get<std::string>())));
        auto p = read_partition_csv(src / entries[k].at("partition").get<std::string>(), graphs.back());
        p.window_id = windows[k].id;
        partitions.push_back(std::move(p));
    }
    const auto paired = pair_windows(windows, returns, graphs, partitions);

    std::set<std::string> wanted(cfg.modes.begin(), cfg.modes.end());
    const auto keep = [&](SelectionMode m) { return wanted.count(to_string(m)) > 0; };

    ExperimentOptions opt{cfg.m, cfg.tail, cfg.samples, cfg.seed, cfg.worker_count()};
    const auto frontier = frontier_experiment(returns, paired, opt, default_q_grid(cfg.q_points), cfg.risk_bins);
    reset_dir(dir);
    json files = json::array();

    std::string text = "mode,window,q,risk,return,sample\n";
    for (const auto& s : frontier.samples) {
        if (!keep(s.mode)) {
            continue;
        }
        for (const auto& pt : s.points) {
            text += fmt::format("{},{},{},{},{},{}\n", to_string(s.mode), s.window_id, format_number(pt.q),
                                format_number(pt.risk), format_number(pt.expected_return), s.sample);
        }
    }
    json infeasible = json::array();
    for (const auto& [window, why] : frontier.skipped) {
        const auto mode = why.substr(0, why.find(':'));
        if (wanted.count(mode)) {
            text += fmt::format("{},{},NA,NA,NA,NA\n", mode, window);
            infeasible.push_back({{"table", "frontier"}, {"window", window}, {"mode", mode},
                                  {"reason", why.substr(why.find(':') + 1)}});
        }
    }
    write_atomic(dir / "frontier.csv", text);
    files.push_back("frontier.csv");

    text = "risk_bin,mean_return,var_return,mode\n";
    std::string binned = "risk_bin,mode,mean_return,lower,upper,n_samples\n";
    for (const auto mode : {SelectionMode::Inter, SelectionMode::Intra}) {
        if (!keep(mode)) {
            continue;
        }
        const auto& bins = mode == SelectionMode::Inter ? frontier.inter : frontier.intra;
        for (std::size_t b = 0; b < frontier.risk_bins.size(); ++b) {
            const double mean = b < bins.size() ? bins[b].mean_return : std::nan("");
            const double var = b < bins.size() ? bins[b].var_return : std::nan("");
            const int count = b < bins.size() ? bins[b].n_samples : 0;
            text += fmt::format("{},{},{},{}\n", format_number(frontier.risk_bins[b]), format_number(mean),
                                format_number(var), to_string(mode));
            binned += fmt::format("{},{},{},{},{},{}\n", format_number(frontier.risk_bins[b]), to_string(mode),
                                  format_number(mean), format_number(mean - std::sqrt(var)),
                                  format_number(mean + std::sqrt(var)),
                                  count);
        }
    }
    write_atomic(dir / "frontier_aggregate.csv", text);
    files.push_back("frontier_aggregate.csv");
    if (cfg.plot_data) {
        write_atomic(dir / "frontier_binned.csv", binned);
        files.push_back("frontier_binned.csv");
    }

    const auto series = es_experiment_series(returns, paired, opt);
    text = "window_start_date,mode,mean_es,n_samples\n";
    for (const auto& row : series) {
        if (!keep(row.mode)) {
            continue;
        }
        text += fmt::format("{},{},{},{}\n", row.start_date, to_string(row.mode), format_number(row.mean_es),
                            row.n_samples);
        if (!row.reason.empty()) {
            infeasible.push_back({{"table", "es_series"}, {"window", row.window_id}, {"mode", to_string(row.mode)},
                                  {"reason", row.reason}});
        }
    }
    write_atomic(dir / "es_series.csv", text);
    files.push_back("es_series.csv");

    auto size_opt = opt;
    size_opt.samples = cfg.size_samples;
    const auto sizes = es_vs_size(returns, paired, cfg.m_grid, size_opt);
    text = "m,mode,mean_es,feasible_fraction\n";
    for (const auto& row : sizes.rows) {
        if (keep(row.mode)) {
            text += fmt::format("{},{},{},{}\n", row.m, to_string(row.mode), format_number(row.mean_es),
                                format_number(row.feasible_fraction));
        }
    }
    write_atomic(dir / "es_vs_size.csv", text);
    files.push_back("es_vs_size.csv");

    if (sizes.inter_ceiling >= sizes.intra_ceiling) {
        report.warnings.push_back(fmt::format("inter-community ceiling {} is not below the intra ceiling {}",
                                              sizes.inter_ceiling, sizes.intra_ceiling));
    }
    json manifest{{"stage", "portfolio"},
                  {"key", key},
                  {"settings", settings},
                  {"n_windows", windows.size()},
                  {"inter_ceiling", sizes.inter_ceiling},
                  {"intra_ceiling", sizes.intra_ceiling},
                  {"infeasible", infeasible},
                  {"files", files}};
    write_atomic(dir / "manifest.json", dump(manifest));
    report.status = StageStatus::Ran;
    return report;
}

std::vector<StageReport> cmd_run_all(const PipelineConfig& cfg)
{
    std::vector<StageReport> reports;
    if (cfg.input.empty()) {
        reports.push_back(cmd_synthetic(cfg));
    }
    reports.push_back(cmd_correlate(cfg));
    reports.push_back(cmd_analyze(cfg));
    reports.push_back(cmd_portfolio(cfg));
    return reports;
}

}  // namespace netfolio
