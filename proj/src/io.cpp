#include "bpslam/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bpslam {

namespace {

using nlohmann::json;

constexpr const char* kConfigSchema = "bpslam-config/1";
constexpr const char* kScenarioSchema = "bpslam-scenario/1";

json load_json(const std::string& path, const char* expected_schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (j.value("schema", "") != expected_schema) {
        throw ParseError(path + ": missing or unsupported schema key (expected " +
                         std::string(expected_schema) + ")");
    }
    return j;
}

Vec2 to_vec2(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    return out;
}

/// Splits one CSV line on commas; no quoting (none of the formats need it).
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

class CsvReader {
  public:
    CsvReader(const std::string& path, const std::string& expected_header)
        : path_(path), in_(path) {
        if (!in_) throw ParseError("cannot open " + path);
        std::string header;
        if (std::getline(in_, header)) {
            if (!header.empty() && header.back() == '\r') header.pop_back();
            if (header != expected_header) {
                throw ParseError(path + ":1: expected header '" + expected_header + "'");
            }
            line_no_ = 1;
        }
    }

    bool next(std::vector<std::string>& fields, std::size_t expected) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            fields = split_csv(line);
            if (fields.size() != expected) {
                fail("expected " + std::to_string(expected) + " fields");
            }
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path_ + ":" + std::to_string(line_no_) + ": " + what);
    }

    double num(const std::string& field) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(field, &pos);
            if (pos != field.size()) fail("malformed number '" + field + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("malformed number '" + field + "'");
        }
    }

    std::size_t index(const std::string& field) const {
        const double v = num(field);
        if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            fail("expected a nonnegative integer, got '" + field + "'");
        }
        return static_cast<std::size_t>(v);
    }

  private:
    std::string path_;
    std::ifstream in_;
    std::size_t line_no_ = 0;
};

}  // namespace

RunConfig load_config(const std::string& path) {
    const json j = load_json(path, kConfigSchema);
    RunConfig cfg;
    cfg.mode = j.value("mode", cfg.mode);
    if (cfg.mode != "simulate" && cfg.mode != "run" && cfg.mode != "evaluate") {
        throw ParseError(path + ": unknown mode '" + cfg.mode + "'");
    }
    cfg.scenario_path = j.value("scenario", cfg.scenario_path);
    cfg.measurements_path = j.value("measurements", cfg.measurements_path);
    cfg.out_dir = j.value("out", cfg.out_dir);
    cfg.runs = j.value("runs", cfg.runs);
    cfg.n_steps = j.value("steps", cfg.n_steps);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.filter.n_particles = j.value("particles", cfg.filter.n_particles);

    if (j.contains("filter")) {
        const json& f = j.at("filter");
        FilterParams& p = cfg.filter;
        p.sensor.p_detect = f.value("p_detect", p.sensor.p_detect);
        p.sensor.mu_fa = f.value("mu_fa", p.sensor.mu_fa);
        p.sensor.fa_range_max = f.value("fa_range_max", p.sensor.fa_range_max);
        p.sensor.sigma_meas = f.value("sigma_meas", p.sensor.sigma_meas);
        p.sigma_scale = f.value("sigma_scale", p.sigma_scale);
        p.motion.sigma_w = f.value("sigma_w", p.motion.sigma_w);
        p.dynamics.sigma_a = f.value("sigma_a", p.dynamics.sigma_a);
        p.dynamics.p_survival = f.value("p_survival", p.dynamics.p_survival);
        p.sigma_a1 = f.value("sigma_a1", p.sigma_a1);
        p.mu_birth = f.value("mu_birth", p.mu_birth);
        p.mu_initial = f.value("mu_initial", p.mu_initial);
        p.p_det = f.value("p_det", p.p_det);
        p.p_prun = f.value("p_prun", p.p_prun);
        p.da_eps = f.value("da_eps", p.da_eps);
        p.da_p_max = f.value("da_p_max", p.da_p_max);
        p.phd_particles = f.value("phd_particles", p.phd_particles);
        p.grid_bins = f.value("grid_bins", p.grid_bins);
        p.kde_bandwidth = f.value("kde_bandwidth", p.kde_bandwidth);
        p.parallel = f.value("parallel", p.parallel);
    }

    cfg.generator.p_detect = cfg.filter.sensor.p_detect;
    cfg.generator.mu_fa = cfg.filter.sensor.mu_fa;
    cfg.generator.fa_range_max = cfg.filter.sensor.fa_range_max;
    if (j.contains("generator")) {
        const json& g = j.at("generator");
        cfg.generator.p_detect = g.value("p_detect", cfg.generator.p_detect);
        cfg.generator.mu_fa = g.value("mu_fa", cfg.generator.mu_fa);
        cfg.generator.fa_range_max = g.value("fa_range_max", cfg.generator.fa_range_max);
        cfg.gen_sigma = g.value("sigma", cfg.gen_sigma);
    }

    if (cfg.runs < 1) throw ParseError(path + ": runs must be >= 1");
    if (cfg.filter.n_particles < 100) throw ParseError(path + ": particles must be >= 100");
    return cfg;
}

Scenario load_scenario(const std::string& path) {
    const json j = load_json(path, kScenarioSchema);
    Scenario s;
    for (const json& w : j.at("walls")) {
        s.plan.walls.push_back({{w.at(0).get<double>(), w.at(1).get<double>()},
                                {w.at(2).get<double>(), w.at(3).get<double>()}});
    }
    s.plan.roi_center = to_vec2(j.at("roi_center"));
    s.plan.roi_radius = j.at("roi_radius").get<double>();
    std::vector<Vec2> pas;
    for (const json& p : j.at("pa_positions")) pas.push_back(to_vec2(p));
    s.anchors = build_anchor_map(pas, s.plan);
    for (const json& p : j.at("trajectory")) s.trajectory.push_back(to_vec2(p));
    if (s.trajectory.empty()) throw ParseError(path + ": empty trajectory");
    if (j.contains("generator")) {
        const json& g = j.at("generator");
        s.generator.p_detect = g.value("p_detect", s.generator.p_detect);
        s.generator.mu_fa = g.value("mu_fa", s.generator.mu_fa);
        s.generator.fa_range_max = g.value("fa_range_max", s.generator.fa_range_max);
        s.true_sigma = g.value("sigma", s.true_sigma);
    }
    s.seed = j.value("seed", s.seed);
    return s;
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    json j;
    j["schema"] = kScenarioSchema;
    j["walls"] = json::array();
    for (const WallSegment& w : scenario.plan.walls) {
        j["walls"].push_back({w.p_start.x, w.p_start.y, w.p_end.x, w.p_end.y});
    }
    j["roi_center"] = {scenario.plan.roi_center.x, scenario.plan.roi_center.y};
    j["roi_radius"] = scenario.plan.roi_radius;
    j["pa_positions"] = json::array();
    for (const Vec2& p : scenario.anchors.pa_positions) {
        j["pa_positions"].push_back({p.x, p.y});
    }
    j["trajectory"] = json::array();
    for (const Vec2& p : scenario.trajectory) j["trajectory"].push_back({p.x, p.y});
    j["generator"] = {{"p_detect", scenario.generator.p_detect},
                      {"mu_fa", scenario.generator.mu_fa},
                      {"fa_range_max", scenario.generator.fa_range_max},
                      {"sigma", scenario.true_sigma}};
    j["seed"] = scenario.seed;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_measurements_csv(const std::string& path,
                            const std::vector<std::vector<MeasurementFrame>>& frames) {
    auto out = open_out(path);
    out << "n,j,z,sigma\n";
    for (std::size_t n = 0; n < frames.size(); ++n) {
        for (std::size_t j = 0; j < frames[n].size(); ++j) {
            for (const Measurement& m : frames[n][j]) {
                out << (n + 1) << ',' << (j + 1) << ',' << fmt(m.z) << ',' << fmt(m.sigma)
                    << '\n';
            }
        }
    }
}

std::vector<std::vector<MeasurementFrame>> parse_measurement_csv(
    const std::string& path, std::size_t num_pas) {
    CsvReader reader(path, "n,j,z,sigma");
    struct Row {
        std::size_t n, j;
        Measurement m;
    };
    std::vector<Row> rows;
    std::vector<std::string> f;
    while (reader.next(f, 4)) {
        Row r{reader.index(f[0]), reader.index(f[1]), {reader.num(f[2]), reader.num(f[3])}};
        if (r.n < 1) reader.fail("time index n must be >= 1");
        if (r.j < 1 || r.j > num_pas) {
            reader.fail("PA index j out of range 1.." + std::to_string(num_pas));
        }
        if (r.m.sigma <= 0.0) reader.fail("sigma must be positive");
        rows.push_back(r);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.n < b.n; });
    std::size_t n_max = 0;
    for (const Row& r : rows) n_max = std::max(n_max, r.n);
    std::vector<std::vector<MeasurementFrame>> frames(
        n_max, std::vector<MeasurementFrame>(num_pas));
    for (const Row& r : rows) frames[r.n - 1][r.j - 1].push_back(r.m);
    return frames;
}

void write_agent_estimates_csv(const std::string& path,
                               const std::vector<AgentEstimateRow>& rows) {
    auto out = open_out(path);
    out << "run,n,x,y,vx,vy\n";
    for (const auto& r : rows) {
        out << r.run << ',' << r.n << ',' << fmt(r.x) << ',' << fmt(r.y) << ','
            << fmt(r.vx) << ',' << fmt(r.vy) << '\n';
    }
}

std::vector<AgentEstimateRow> parse_agent_estimates_csv(const std::string& path) {
    CsvReader reader(path, "run,n,x,y,vx,vy");
    std::vector<AgentEstimateRow> rows;
    std::vector<std::string> f;
    while (reader.next(f, 6)) {
        rows.push_back({reader.index(f[0]), reader.index(f[1]), reader.num(f[2]),
                        reader.num(f[3]), reader.num(f[4]), reader.num(f[5])});
    }
    return rows;
}

void write_features_csv(const std::string& path, const std::vector<FeatureRow>& rows) {
    auto out = open_out(path);
    out << "run,n,j,feature_id,x,y,p_exist,detected\n";
    for (const auto& r : rows) {
        out << r.run << ',' << r.n << ',' << r.j << ',' << r.feature_id << ',' << fmt(r.x)
            << ',' << fmt(r.y) << ',' << fmt(r.p_exist) << ',' << (r.detected ? 1 : 0)
            << '\n';
    }
}

std::vector<FeatureRow> parse_features_csv(const std::string& path) {
    CsvReader reader(path, "run,n,j,feature_id,x,y,p_exist,detected");
    std::vector<FeatureRow> rows;
    std::vector<std::string> f;
    while (reader.next(f, 8)) {
        FeatureRow r;
        r.run = reader.index(f[0]);
        r.n = reader.index(f[1]);
        r.j = reader.index(f[2]);
        r.feature_id = static_cast<int>(reader.index(f[3]));
        r.x = reader.num(f[4]);
        r.y = reader.num(f[5]);
        r.p_exist = reader.num(f[6]);
        const std::size_t d = reader.index(f[7]);
        if (d > 1) reader.fail("detected must be 0 or 1");
        r.detected = d == 1;
        rows.push_back(r);
    }
    return rows;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    auto out = open_out(path);
    out << "n,rmse,ospa_pa1,ospa_pa2,n_detected_pa1,n_detected_pa2\n";
    for (const auto& r : rows) {
        out << r.n << ',' << fmt(r.rmse) << ',' << fmt(r.ospa_pa1) << ','
            << fmt(r.ospa_pa2) << ',' << fmt(r.n_detected_pa1) << ','
            << fmt(r.n_detected_pa2) << '\n';
    }
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& path) {
    CsvReader reader(path, "n,rmse,ospa_pa1,ospa_pa2,n_detected_pa1,n_detected_pa2");
    std::vector<MetricsRow> rows;
    std::vector<std::string> f;
    while (reader.next(f, 6)) {
        rows.push_back({reader.index(f[0]), reader.num(f[1]), reader.num(f[2]),
                        reader.num(f[3]), reader.num(f[4]), reader.num(f[5])});
    }
    return rows;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryStat>& stats) {
    auto out = open_out(path);
    out << "metric,value\n";
    for (const auto& s : stats) out << s.name << ',' << fmt(s.value) << '\n';
}

std::vector<SummaryStat> parse_summary_csv(const std::string& path) {
    CsvReader reader(path, "metric,value");
    std::vector<SummaryStat> stats;
    std::vector<std::string> f;
    while (reader.next(f, 2)) stats.push_back({f[0], reader.num(f[1])});
    return stats;
}

}  // namespace bpslam
