#include "decimaxsum/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <charconv>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "decimaxsum/ising.hpp"
#include "decimaxsum/numeric_text.hpp"
#include "decimaxsum/rng.hpp"
#include "json.hpp"

namespace dms {

using ojson = nlohmann::ordered_json;

void ExperimentConfig::validate() const {
    if (algorithms.empty()) throw std::invalid_argument("experiment: no algorithms");
    if (sides.empty()) throw std::invalid_argument("experiment: no sides");
    if (problems_per_setting < 1 || runs_per_problem < 1) {
        throw std::invalid_argument("experiment: problem and run counts must be >= 1");
    }
    for (const auto& a : algorithms) (void)parse_algorithm(a);
    for (std::size_t s : sides) IsingParams{s, beta, unary_bound, 0}.validate();
    engine.validate();
}

std::size_t ExperimentConfig::cell_count() const {
    return algorithms.size() * sides.size() * problems_per_setting * runs_per_problem;
}

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
    ojson doc;
    try {
        doc = ojson::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("experiment config: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("experiment config: expected an object");

    ExperimentConfig cfg;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "algorithms") {
                cfg.algorithms = value.get<std::vector<std::string>>();
            } else if (key == "sides") {
                cfg.sides = value.get<std::vector<std::size_t>>();
            } else if (key == "problems_per_setting") {
                cfg.problems_per_setting = value.get<std::size_t>();
            } else if (key == "runs_per_problem") {
                cfg.runs_per_problem = value.get<std::size_t>();
            } else if (key == "base_seed") {
                cfg.base_seed = value.get<std::uint64_t>();
            } else if (key == "beta") {
                cfg.beta = value.get<double>();
            } else if (key == "unary_bound") {
                cfg.unary_bound = value.get<double>();
            } else if (key == "threads") {
                cfg.threads = value.get<std::size_t>();
            } else if (key == "engine") {
                for (const auto& [ekey, evalue] : value.items()) {
                    if (ekey == "eps") {
                        cfg.engine.eps = evalue.get<double>();
                    } else if (ekey == "limit") {
                        cfg.engine.limit = evalue.get<std::size_t>();
                    } else if (ekey == "suppression") {
                        cfg.engine.suppression = evalue.get<bool>();
                    } else if (ekey == "normalization") {
                        const auto mode = evalue.get<std::string>();
                        if (mode == "mean") {
                            cfg.engine.normalization = Normalization::Mean;
                        } else if (mode == "max") {
                            cfg.engine.normalization = Normalization::Max;
                        } else if (mode == "none") {
                            cfg.engine.normalization = Normalization::None;
                        } else {
                            throw std::invalid_argument("unknown normalization \"" + mode + "\"");
                        }
                    } else {
                        throw std::invalid_argument("unknown engine key \"" + ekey + "\"");
                    }
                }
            } else {
                throw std::invalid_argument("unknown key \"" + key + "\"");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::uint64_t instance_seed(std::uint64_t base, std::size_t side, std::size_t problem) {
    return derive_seed(base, side, problem);
}

std::uint64_t run_seed(std::uint64_t base, std::size_t side, std::size_t problem, std::size_t run) {
    return derive_seed(base, side, problem, run);
}

RunMetrics run_cell(const ExperimentConfig& cfg, const std::string& algorithm, std::size_t side,
                    std::size_t problem, std::size_t run) {
    RunMetrics row;
    row.algorithm = algorithm;
    row.side = side;
    row.problem = problem;
    row.run = run;
    row.instance_id = "ising-s" + std::to_string(side) + "-p" + std::to_string(problem);
    row.instance_seed = instance_seed(cfg.base_seed, side, problem);
    row.seed = run_seed(cfg.base_seed, side, problem, run);

    const AlgorithmSpec spec = parse_algorithm(algorithm);
    const Dcop dcop = generate_ising({side, cfg.beta, cfg.unary_bound, row.instance_seed});
    EngineConfig engine = cfg.engine;
    engine.trace = nullptr;

    const auto start = std::chrono::steady_clock::now();
    const SolveResult result = run_algorithm(spec, dcop, engine, row.seed);
    const auto stop = std::chrono::steady_clock::now();

    row.final_cost = result.cost();
    row.msgs_sent = result.stats.msgs_sent;
    row.iterations = result.stats.iterations;
    row.decimations = result.stats.decimations;
    row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    return row;
}

std::vector<RunMetrics> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    struct Cell {
        std::size_t side, problem, run, algo;
    };
    std::vector<Cell> cells;
    cells.reserve(cfg.cell_count());
    for (std::size_t side : cfg.sides) {
        for (std::size_t p = 0; p < cfg.problems_per_setting; ++p) {
            for (std::size_t r = 0; r < cfg.runs_per_problem; ++r) {
                for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) cells.push_back({side, p, r, a});
            }
        }
    }

    std::vector<RunMetrics> rows(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::size_t first_error_cell = cells.size();

    const auto worker = [&] {
        for (std::size_t k = next++; k < cells.size(); k = next++) {
            const Cell& c = cells[k];
            try {
                rows[k] = run_cell(cfg, cfg.algorithms[c.algo], c.side, c.problem, c.run);
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (k < first_error_cell) {
                    first_error_cell = k;
                    first_error = std::make_exception_ptr(std::runtime_error(
                        "cell (side=" + std::to_string(c.side) + ", problem=" + std::to_string(c.problem) +
                        ", run=" + std::to_string(c.run) + ", algorithm=" + cfg.algorithms[c.algo] +
                        "): " + e.what()));
                }
            }
        }
    };

    const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, std::max<std::size_t>(1, cells.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);
    return rows;
}

OutputFormat parse_format(std::string_view name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    throw std::invalid_argument("unknown output format \"" + std::string(name) + "\"");
}

namespace {

const char* const kRunHeader =
    "algorithm,side,problem,run,instance_id,instance_seed,seed,final_cost,msgs_sent,iterations,decimations";

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            record.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw std::invalid_argument("csv: unterminated quoted field");
    if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line) {
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument("csv line " + std::to_string(line) + ": bad number \"" + s + "\"");
    }
    return value;
}

}  // namespace

std::string emit_results(const std::vector<RunMetrics>& rows, OutputFormat format, bool include_timing) {
    if (format == OutputFormat::Json) {
        ojson out = ojson::array();
        for (const auto& r : rows) {
            ojson o;
            o["algorithm"] = r.algorithm;
            o["side"] = r.side;
            o["problem"] = r.problem;
            o["run"] = r.run;
            o["instance_id"] = r.instance_id;
            o["instance_seed"] = r.instance_seed;
            o["seed"] = r.seed;
            o["final_cost"] = r.final_cost;
            o["msgs_sent"] = r.msgs_sent;
            o["iterations"] = r.iterations;
            o["decimations"] = r.decimations;
            if (include_timing) o["wall_ms"] = r.wall_ms;
            out.push_back(std::move(o));
        }
        return out.dump(2) + "\n";
    }
    std::ostringstream os;
    os << kRunHeader << (include_timing ? ",wall_ms" : "") << '\n';
    for (const auto& r : rows) {
        os << csv_field(r.algorithm) << ',' << r.side << ',' << r.problem << ',' << r.run << ','
           << csv_field(r.instance_id) << ',' << r.instance_seed << ',' << r.seed << ','
           << format_real(r.final_cost) << ',' << r.msgs_sent << ',' << r.iterations << ',' << r.decimations;
        if (include_timing) os << ',' << format_real(r.wall_ms);
        os << '\n';
    }
    return os.str();
}

std::vector<RunMetrics> parse_results_csv(std::string_view text) {
    const auto records = parse_csv(text);
    if (records.empty()) throw std::invalid_argument("csv: missing header");
    std::map<std::string, std::size_t> column;
    for (std::size_t k = 0; k < records[0].size(); ++k) column[records[0][k]] = k;
    const auto col = [&](const char* name) {
        const auto it = column.find(name);
        if (it == column.end()) throw std::invalid_argument(std::string("csv: missing column ") + name);
        return it->second;
    };
    const std::size_t c_alg = col("algorithm"), c_side = col("side"), c_problem = col("problem"),
                      c_run = col("run"), c_cost = col("final_cost"), c_msgs = col("msgs_sent"),
                      c_iter = col("iterations"), c_dec = col("decimations");
    const auto optional_col = [&](const char* name) {
        const auto it = column.find(name);
        return it == column.end() ? records[0].size() : it->second;
    };
    const std::size_t c_inst = optional_col("instance_id"), c_iseed = optional_col("instance_seed"),
                      c_seed = optional_col("seed"), c_wall = optional_col("wall_ms");

    std::vector<RunMetrics> rows;
    for (std::size_t line = 1; line < records.size(); ++line) {
        const auto& rec = records[line];
        if (rec.size() != records[0].size()) {
            throw std::invalid_argument("csv line " + std::to_string(line + 1) + ": wrong field count");
        }
        const auto has = [&](std::size_t c) { return c < rec.size(); };
        RunMetrics r;
        r.algorithm = rec[c_alg];
        r.side = parse_number<std::size_t>(rec[c_side], line + 1);
        r.problem = parse_number<std::size_t>(rec[c_problem], line + 1);
        r.run = parse_number<std::size_t>(rec[c_run], line + 1);
        if (has(c_inst)) r.instance_id = rec[c_inst];
        if (has(c_iseed)) r.instance_seed = parse_number<std::uint64_t>(rec[c_iseed], line + 1);
        if (has(c_seed)) r.seed = parse_number<std::uint64_t>(rec[c_seed], line + 1);
        r.final_cost = parse_number<double>(rec[c_cost], line + 1);
        r.msgs_sent = parse_number<std::uint64_t>(rec[c_msgs], line + 1);
        r.iterations = parse_number<std::size_t>(rec[c_iter], line + 1);
        r.decimations = parse_number<std::size_t>(rec[c_dec], line + 1);
        if (has(c_wall)) r.wall_ms = parse_number<double>(rec[c_wall], line + 1);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<AggregateRow> aggregate(const std::vector<RunMetrics>& rows) {
    struct Sums {
        double cost = 0, msgs = 0, iters = 0, decs = 0;
        std::size_t runs = 0;
    };
    using SettingKey = std::pair<std::string, std::size_t>;
    std::vector<SettingKey> order;
    std::map<SettingKey, std::map<std::size_t, Sums>> per_problem;
    for (const auto& r : rows) {
        const SettingKey key{r.algorithm, r.side};
        auto [it, inserted] = per_problem.try_emplace(key);
        if (inserted) order.push_back(key);
        auto& s = it->second[r.problem];
        s.cost += r.final_cost;
        s.msgs += static_cast<double>(r.msgs_sent);
        s.iters += static_cast<double>(r.iterations);
        s.decs += static_cast<double>(r.decimations);
        ++s.runs;
    }

    std::vector<AggregateRow> out;
    for (const auto& key : order) {
        AggregateRow agg;
        agg.algorithm = key.first;
        agg.side = key.second;
        for (const auto& [problem, s] : per_problem[key]) {
            const double n = static_cast<double>(s.runs);
            agg.mean_final_cost += s.cost / n;
            agg.mean_msgs_sent += s.msgs / n;
            agg.mean_iterations += s.iters / n;
            agg.mean_decimations += s.decs / n;
            ++agg.problems;
        }
        const double p = static_cast<double>(agg.problems);
        agg.mean_final_cost /= p;
        agg.mean_msgs_sent /= p;
        agg.mean_iterations /= p;
        agg.mean_decimations /= p;
        out.push_back(std::move(agg));
    }
    return out;
}

std::string emit_aggregate(const std::vector<AggregateRow>& rows, OutputFormat format) {
    if (format == OutputFormat::Json) {
        ojson out = ojson::array();
        for (const auto& r : rows) {
            ojson o;
            o["algorithm"] = r.algorithm;
            o["side"] = r.side;
            o["problems"] = r.problems;
            o["mean_final_cost"] = r.mean_final_cost;
            o["mean_msgs_sent"] = r.mean_msgs_sent;
            o["mean_iterations"] = r.mean_iterations;
            o["mean_decimations"] = r.mean_decimations;
            out.push_back(std::move(o));
        }
        return out.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "algorithm,side,problems,mean_final_cost,mean_msgs_sent,mean_iterations,mean_decimations\n";
    for (const auto& r : rows) {
        os << csv_field(r.algorithm) << ',' << r.side << ',' << r.problems << ',' << format_real(r.mean_final_cost)
           << ',' << format_real(r.mean_msgs_sent) << ',' << format_real(r.mean_iterations) << ','
           << format_real(r.mean_decimations) << '\n';
    }
    return os.str();
}

std::vector<std::string> reference_algorithms() {
    const auto deci = [](const std::string& trigger, const std::string& perform, const std::string& assign) {
        return "decimaxsum:trigger=" + trigger + ";filter=all;perform=" + perform + ";assign=" + assign;
    };
    return {
        deci("freq:rate:2", "max_entropy", "max_marginal"),
        deci("freq:rate:3", "max_entropy", "max_marginal"),
        deci("freq:rate:5", "max_entropy", "max_marginal"),
        deci("freq:rate:10", "max_entropy", "max_marginal"),
        deci("freq:rate:20", "max_entropy", "max_marginal"),
        deci("freq:rate:100", "max_entropy", "max_marginal"),
        deci("freq:budget:1000", "max_entropy", "max_marginal"),
        deci("freq:rate:2", "max_entropy", "sample"),
        deci("freq:rate:2", "max_rand", "max_marginal"),
        deci("freq:rate:2", "max_rand", "sample"),
        deci("converge", "max_rand", "max_marginal"),
        "maxsum",
        "maxsum_ad",
        "maxsum_ad_vp",
        "montanari",
        "mooij",
    };
}

}  // namespace dms
