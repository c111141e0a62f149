#include "shorsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace shorsim {

using json = nlohmann::json;

const char* backend_name(Backend b) {
    return b == Backend::simulator ? "simulator" : "known_order_sampler";
}
const char* post_mode_name(PostMode m) { return m == PostMode::shor ? "shor" : "ekera"; }

Backend backend_from_name(const std::string& name) {
    if (name == "simulator") return Backend::simulator;
    if (name == "known_order_sampler" || name == "sampler") return Backend::known_order_sampler;
    throw ConfigError("unknown backend: " + name);
}

PostMode post_mode_from_name(const std::string& name) {
    if (name == "shor") return PostMode::shor;
    if (name == "ekera") return PostMode::ekera;
    throw ConfigError("unknown post-processing mode: " + name);
}

std::vector<FactoringProblem> generate_campaign_problems(unsigned L, unsigned problems_per_L,
                                                         unsigned bases_per_N, u64 seed) {
    std::vector<FactoringProblem> out;
    std::set<u64> seen_n;
    std::vector<FactoringProblem> semiprimes;
    const unsigned attempt_cap = problems_per_L * 400;
    for (unsigned attempt = 0; attempt < attempt_cap && semiprimes.size() < problems_per_L;
         ++attempt) {
        u64 sub_seed = derive_seed(seed, (u64{L} << 32) | attempt, RngDomain::problem_seed);
        FactoringProblem prob = generate_uniform_problem(L, sub_seed);
        if (seen_n.insert(prob.N).second) semiprimes.push_back(prob);
    }
    u64 index = 0;
    for (const auto& base_prob : semiprimes) {
        std::set<u64> seen_a;
        RngStream rng(derive_seed(seed, (u64{L} << 40) | base_prob.N, RngDomain::problem_seed),
                      0, 1, RngDomain::problem_gen);
        // small moduli cannot supply bases_per_N distinct bases; take what exists
        u64 coprime_count = 0;
        bool enumerate = base_prob.N <= 4096;
        std::vector<u64> all_bases;
        if (enumerate) {
            for (u64 a = 2; a < base_prob.N; ++a)
                if (gcd_u64(a, base_prob.N) == 1) all_bases.push_back(a);
            coprime_count = all_bases.size();
        }
        unsigned want = bases_per_N;
        if (enumerate) want = static_cast<unsigned>(std::min<u64>(want, coprime_count));
        unsigned guard = 0;
        while (seen_a.size() < want && guard < 64 * bases_per_N + 1024) {
            ++guard;
            u64 a;
            if (enumerate) {
                a = all_bases[rng.below(all_bases.size())];
            } else {
                a = pick_base(base_prob.N, rng).a;
            }
            if (!seen_a.insert(a).second) continue;
            FactoringProblem prob = base_prob;
            prob.a = a;
            prob.seed = derive_seed(seed, 0x100000000ull + index, RngDomain::problem_seed);
            ++index;
            out.push_back(prob);
        }
    }
    return out;
}

namespace {

void note_outcome(ProblemResult& result, const PostProcessOutcome& outcome, u64 index_1based) {
    switch (outcome.classification) {
        case Classification::success: ++result.success; break;
        case Classification::lucky_ne: ++result.lucky_ne; break;
        case Classification::lucky_no: ++result.lucky_no; break;
        case Classification::lucky_oo: ++result.lucky_oo; break;
        case Classification::fail: ++result.fail; break;
    }
    if (!outcome.factors.empty() && !result.first_factor_index)
        result.first_factor_index = index_1based;
    u64 r = static_cast<u64>(outcome.convergent.r);
    if (r == result.order && !result.first_order_index) result.first_order_index = index_1based;
    bool lucky = outcome.classification == Classification::lucky_ne ||
                 outcome.classification == Classification::lucky_no ||
                 outcome.classification == Classification::lucky_oo;
    if (lucky) {
        ++result.r_ratio.total_lucky;
        if (r > result.order) ++result.r_ratio.overflow;
        else if (r != 0 && result.order % r == 0) ++result.r_ratio.reciprocal[result.order / r];
        else ++result.r_ratio.other;
    }
}

} // namespace

ProblemResult run_problem(const FactoringProblem& problem, const CampaignSpec& spec) {
    if (!problem.p || !problem.q)
        throw ConfigError("campaign problems need known factors for verification labels");
    ProblemResult result;
    result.problem = problem;
    result.M = spec.M;
    result.order =
        multiplicative_order(problem.a, problem.N, std::make_pair(*problem.p, *problem.q)).value;
    result.order_solvable = result.order % 2 == 0 &&
                            mod_pow(problem.a, result.order / 2, problem.N) != problem.N - 1;
    EkeraParams params = EkeraParams::for_problem(problem.L, problem.t);

    std::optional<IterativeShorEngine> engine;
    std::optional<KnownOrderSampler> sampler;
    if (spec.backend == Backend::simulator) {
        engine.emplace(problem, spec.error, spec.sim);
    } else {
        sampler.emplace(make_distribution_spec(result.order, problem.t));
    }

    for (unsigned m = 0; m < spec.M; ++m) {
        u128 j;
        if (engine) {
            j = engine->run(problem.seed, m).bits.j;
        } else {
            RngStream draw(problem.seed, m, 0, RngDomain::sampler);
            j = sampler->sample(draw);
        }
        PostProcessOutcome outcome;
        if (spec.post_mode == PostMode::shor) {
            outcome = shor_standard_procedure(j, problem.t, problem.N, problem.a, result.order);
        } else {
            RngStream post_rng(problem.seed, m, 1, RngDomain::postprocess);
            outcome = ekera_postprocess(j, problem.t, problem.N, problem.a, params, post_rng,
                                        result.order);
        }
        note_outcome(result, outcome, m + 1);
    }
    return result;
}

namespace {

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double rms_deviation(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

std::vector<LAggregate> aggregate_by_L(const std::vector<ProblemResult>& problems) {
    std::map<unsigned, std::vector<const ProblemResult*>> by_L;
    for (const auto& p : problems) by_L[p.problem.L].push_back(&p);
    std::vector<LAggregate> out;
    for (const auto& [L, group] : by_L) {
        LAggregate agg;
        agg.L = L;
        agg.problem_count = group.size();
        std::vector<double> succ, lucky;
        std::map<u64, std::vector<double>> succ_by_N, lucky_by_N;
        for (const auto* p : group) {
            succ.push_back(p->success_fraction());
            lucky.push_back(p->success_lucky_fraction());
            succ_by_N[p->problem.N].push_back(p->success_fraction());
            lucky_by_N[p->problem.N].push_back(p->success_lucky_fraction());
        }
        agg.mean_success = mean(succ);
        agg.mean_success_lucky = mean(lucky);
        agg.rms_success_per_problem = rms_deviation(succ);
        agg.rms_success_lucky_per_problem = rms_deviation(lucky);
        std::vector<double> per_n_succ, per_n_lucky;
        for (auto& [n, v] : succ_by_N) per_n_succ.push_back(mean(v));
        for (auto& [n, v] : lucky_by_N) per_n_lucky.push_back(mean(v));
        agg.rms_success_across_N = rms_deviation(per_n_succ);
        agg.rms_success_lucky_across_N = rms_deviation(per_n_lucky);
        out.push_back(agg);
    }
    return out;
}

} // namespace

double CampaignResult::overall_mean_success() const {
    std::vector<double> v;
    for (const auto& p : problems) v.push_back(p.success_fraction());
    return mean(v);
}

double CampaignResult::overall_mean_success_lucky() const {
    std::vector<double> v;
    for (const auto& p : problems) v.push_back(p.success_lucky_fraction());
    return mean(v);
}

CampaignResult run_campaign(const CampaignSpec& spec, u64 seed, unsigned workers) {
    CampaignResult result;
    result.spec = spec;
    result.seed = seed;
    std::vector<FactoringProblem> problems;
    if (spec.explicit_problems) {
        problems = *spec.explicit_problems;
    } else {
        for (unsigned L = spec.L_min; L <= spec.L_max; ++L) {
            auto group = generate_campaign_problems(L, spec.problems_per_L, spec.bases_per_N,
                                                    derive_seed(seed, L, RngDomain::problem_seed));
            problems.insert(problems.end(), group.begin(), group.end());
        }
    }
    result.problems.resize(problems.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= problems.size()) return;
            result.problems[i] = run_problem(problems[i], spec);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    result.aggregates = aggregate_by_L(result.problems);
    return result;
}

FirstHitStatistics first_hit_statistics(const CampaignResult& result) {
    FirstHitStatistics stats;
    stats.problems = result.problems.size();
    u64 first_factor = 0, first_order = 0;
    for (const auto& p : result.problems) {
        if (p.first_factor_index) {
            ++stats.first_factor_histogram[*p.first_factor_index];
            if (*p.first_factor_index == 1) ++first_factor;
        } else {
            ++stats.never_factored;
        }
        if (p.first_order_index) {
            ++stats.first_order_histogram[*p.first_order_index];
            if (*p.first_order_index == 1) ++first_order;
        } else {
            ++stats.never_order;
        }
    }
    if (stats.problems > 0) {
        stats.solved_by_first_fraction = static_cast<double>(first_factor) / stats.problems;
        stats.order_by_first_fraction = static_cast<double>(first_order) / stats.problems;
        stats.never_factored_fraction =
            static_cast<double>(stats.never_factored) / stats.problems;
    }
    return stats;
}

RRatioHistogram r_ratio_histogram(const CampaignResult& result) {
    RRatioHistogram merged;
    for (const auto& p : result.problems) {
        merged.total_lucky += p.r_ratio.total_lucky;
        merged.overflow += p.r_ratio.overflow;
        merged.other += p.r_ratio.other;
        for (const auto& [d, c] : p.r_ratio.reciprocal) merged.reciprocal[d] += c;
    }
    return merged;
}

std::vector<TSweepPoint> t_sweep(const FactoringProblem& problem,
                                 const std::vector<unsigned>& t_values, unsigned M,
                                 PostMode post_mode, const ErrorConfig& error, u64 seed,
                                 const SimulatorOptions& options, unsigned workers) {
    std::vector<TSweepPoint> out(t_values.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= t_values.size()) return;
            CampaignSpec spec;
            spec.M = M;
            spec.error = error;
            spec.post_mode = post_mode;
            spec.backend = Backend::simulator;
            spec.sim = options;
            FactoringProblem variant = problem;
            variant.t = t_values[i];
            variant.seed = derive_seed(seed, t_values[i], RngDomain::problem_seed);
            ProblemResult r = run_problem(variant, spec);
            out[i] = TSweepPoint{t_values[i], static_cast<double>(r.success) / M,
                                 static_cast<double>(r.lucky_total()) / M,
                                 static_cast<double>(r.fail) / M};
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return out;
}

std::vector<ErrorSweepPoint> error_sweep(const FactoringProblem& problem, ErrorKind kind,
                                         const std::vector<double>& p_errors, unsigned M,
                                         PostMode post_mode, u64 seed,
                                         const SimulatorOptions& options, unsigned workers) {
    std::vector<ErrorSweepPoint> out(p_errors.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= p_errors.size()) return;
            double p_error = p_errors[i];
            ErrorConfig config;
            config.kind = kind;
            config.delta = delta_for_error_probability(kind, p_error);
            if (kind == ErrorKind::quantum_measure)
                config.pauli = PauliProbs{config.delta / 2, config.delta / 2, 0.0};
            if (kind == ErrorKind::none) config = ErrorConfig::none_config();
            CampaignSpec spec;
            spec.M = M;
            spec.error = config;
            spec.post_mode = post_mode;
            spec.backend = Backend::simulator;
            spec.sim = options;
            FactoringProblem variant = problem;
            variant.seed = derive_seed(seed, i, RngDomain::problem_seed);
            ProblemResult r = run_problem(variant, spec);
            double success = post_mode == PostMode::shor
                                 ? r.success_lucky_fraction()
                                 : static_cast<double>(r.success) / M;
            out[i] = ErrorSweepPoint{p_error, config.delta, success,
                                     std::pow(1.0 - p_error, static_cast<double>(problem.t))};
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return out;
}

namespace {

json problem_json(const FactoringProblem& p) {
    json j;
    j["N"] = std::to_string(p.N);
    j["a"] = std::to_string(p.a);
    j["L"] = p.L;
    j["t"] = p.t;
    if (p.p) j["p"] = std::to_string(*p.p);
    if (p.q) j["q"] = std::to_string(*p.q);
    j["seed"] = std::to_string(p.seed);
    return j;
}

FactoringProblem problem_from(const json& j) {
    FactoringProblem p;
    p.N = std::stoull(j.at("N").get<std::string>());
    p.a = std::stoull(j.at("a").get<std::string>());
    p.L = j.at("L").get<unsigned>();
    p.t = j.at("t").get<unsigned>();
    if (j.contains("p")) p.p = std::stoull(j["p"].get<std::string>());
    if (j.contains("q")) p.q = std::stoull(j["q"].get<std::string>());
    if (j.contains("seed")) p.seed = std::stoull(j["seed"].get<std::string>());
    return p;
}

} // namespace

std::string campaign_to_jsonl(const CampaignResult& result) {
    std::ostringstream out;
    json header{{"schema", "shorsim/campaign"},
                {"version", 1},
                {"seed", std::to_string(result.seed)},
                {"M", result.spec.M},
                {"backend", backend_name(result.spec.backend)},
                {"post_mode", post_mode_name(result.spec.post_mode)},
                {"error_kind", error_kind_name(result.spec.error.kind)},
                {"error_delta", result.spec.error.delta}};
    out << header.dump() << "\n";
    for (const auto& p : result.problems) {
        json j;
        j["record"] = "problem";
        j["problem"] = problem_json(p.problem);
        j["order"] = std::to_string(p.order);
        j["M"] = p.M;
        j["success"] = p.success;
        j["lucky_ne"] = p.lucky_ne;
        j["lucky_no"] = p.lucky_no;
        j["lucky_oo"] = p.lucky_oo;
        j["fail"] = p.fail;
        j["order_solvable"] = p.order_solvable;
        if (p.first_factor_index) j["first_factor_index"] = *p.first_factor_index;
        if (p.first_order_index) j["first_order_index"] = *p.first_order_index;
        json ratio;
        for (const auto& [d, c] : p.r_ratio.reciprocal) ratio[std::to_string(d)] = c;
        j["r_ratio"] = {{"reciprocal", ratio},
                        {"overflow", p.r_ratio.overflow},
                        {"other", p.r_ratio.other},
                        {"total_lucky", p.r_ratio.total_lucky}};
        out << j.dump() << "\n";
    }
    for (const auto& agg : result.aggregates) {
        json j;
        j["record"] = "aggregate";
        j["L"] = agg.L;
        j["problems"] = agg.problem_count;
        j["mean_success"] = agg.mean_success;
        j["mean_success_lucky"] = agg.mean_success_lucky;
        j["rms_success_across_N"] = agg.rms_success_across_N;
        j["rms_success_lucky_across_N"] = agg.rms_success_lucky_across_N;
        j["rms_success_per_problem"] = agg.rms_success_per_problem;
        j["rms_success_lucky_per_problem"] = agg.rms_success_lucky_per_problem;
        out << j.dump() << "\n";
    }
    return out.str();
}

CampaignResult campaign_from_jsonl(const std::string& text) {
    CampaignResult result;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.contains("schema")) {
            result.seed = std::stoull(j.at("seed").get<std::string>());
            result.spec.M = j.at("M").get<unsigned>();
            result.spec.backend = backend_from_name(j.at("backend").get<std::string>());
            result.spec.post_mode = post_mode_from_name(j.at("post_mode").get<std::string>());
            continue;
        }
        if (j.at("record") == "problem") {
            ProblemResult p;
            p.problem = problem_from(j.at("problem"));
            p.order = std::stoull(j.at("order").get<std::string>());
            p.M = j.at("M").get<unsigned>();
            p.success = j.at("success").get<u64>();
            p.lucky_ne = j.at("lucky_ne").get<u64>();
            p.lucky_no = j.at("lucky_no").get<u64>();
            p.lucky_oo = j.at("lucky_oo").get<u64>();
            p.fail = j.at("fail").get<u64>();
            p.order_solvable = j.at("order_solvable").get<bool>();
            if (j.contains("first_factor_index"))
                p.first_factor_index = j["first_factor_index"].get<u64>();
            if (j.contains("first_order_index"))
                p.first_order_index = j["first_order_index"].get<u64>();
            const auto& ratio = j.at("r_ratio");
            for (const auto& [key, value] : ratio.at("reciprocal").items())
                p.r_ratio.reciprocal[std::stoull(key)] = value.get<u64>();
            p.r_ratio.overflow = ratio.at("overflow").get<u64>();
            p.r_ratio.other = ratio.at("other").get<u64>();
            p.r_ratio.total_lucky = ratio.at("total_lucky").get<u64>();
            result.problems.push_back(std::move(p));
        }
    }
    result.aggregates = aggregate_by_L(result.problems);
    return result;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string simulate_to_jsonl(const FactoringProblem& problem, const ErrorConfig& error,
                              unsigned shots, u64 seed, const SimulatorOptions& options) {
    std::ostringstream out;
    json header{{"schema", "shorsim/simulate"},
                {"version", 1},
                {"seed", std::to_string(seed)},
                {"shots", shots},
                {"shards", options.shard_count},
                {"error_kind", error_kind_name(error.kind)}};
    out << header.dump() << "\n";
    IterativeShorEngine engine(problem, error, options);
    for (unsigned m = 0; m < shots; ++m) {
        RunResult run = engine.run(seed, m);
        for (const auto& st : run.trace) {
            json j{{"record", "stage"},
                   {"shot", m},
                   {"cbit", st.cbit},
                   {"p1", st.p1},
                   {"bit", st.sampled_bit},
                   {"observed", st.observed_bit}};
            if (st.event.classical_flip) j["error_event"] = "classical_flip";
            if (st.event.quantum_error_branch) j["error_event"] = "quantum_error_branch";
            out << j.dump() << "\n";
        }
        std::string binary;
        for (unsigned b = run.bits.t; b-- > 0;)
            binary.push_back((run.bits.j >> b) & 1 ? '1' : '0');
        json j{{"record", "bitstring"},
               {"shot", m},
               {"t", run.bits.t},
               {"j", to_string_u128(run.bits.j)},
               {"j_binary", binary}};
        out << j.dump() << "\n";
    }
    return out.str();
}

} // namespace shorsim
