// Command-line front end: problem generation, simulation, analytic sampling,
// post-processing, campaigns, sweeps, and bound calculators.

#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shorsim/harness.hpp"
#include "shorsim/spectrum.hpp"

using namespace shorsim;
using json = nlohmann::json;

namespace {

std::vector<unsigned> parse_range(const std::string& text) {
    // "a:b" inclusive, or a comma list
    std::vector<unsigned> out;
    auto colon = text.find(':');
    if (colon != std::string::npos) {
        unsigned lo = std::stoul(text.substr(0, colon));
        unsigned hi = std::stoul(text.substr(colon + 1));
        for (unsigned v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
    return out;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-") std::cout << text;
    else write_text_file(out_path, text);
}

FactoringProblem problem_from_flags(u64 N, u64 a, u64 p, u64 q, unsigned t) {
    FactoringProblem prob;
    prob.N = N;
    prob.a = a;
    prob.L = bit_length_u64(N);
    prob.t = t != 0 ? t : recommended_t(N);
    if (p != 0) prob.p = p;
    if (q != 0) prob.q = q;
    if (p != 0 && q != 0 && u128{p} * q != N)
        throw ConfigError("p * q != N");
    if (gcd_u64(a, N) != 1) throw ConfigError("gcd(a, N) != 1");
    return prob;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Iterative Shor factoring testbed: sharded statevector simulation,"
                 " analytic bitstring sampling, and classical post-processing"};
    app.require_subcommand(1);

    u64 seed = 1;
    unsigned shards = 4;
    unsigned workers = 1;
    unsigned qubit_ceiling = 26;
    std::string out_path;
    app.add_option("--seed", seed, "global RNG seed")->capture_default_str();
    app.add_option("--shards", shards, "shard count (power of two >= 2)")->capture_default_str();
    app.add_option("--workers", workers, "worker threads")->capture_default_str();
    app.add_option("--qubit-ceiling", qubit_ceiling, "maximum simulated qubits")
        ->capture_default_str();
    app.add_option("--out", out_path, "output file ('-' for stdout)");

    // generate-problems
    auto* gen = app.add_subcommand("generate-problems", "uniform factoring problems");
    std::string gen_L = "9:18";
    unsigned gen_count = 50, gen_bases = 50;
    gen->add_option("--L", gen_L, "bit lengths, a:b or list")->capture_default_str();
    gen->add_option("--count", gen_count, "semiprimes per L")->capture_default_str();
    gen->add_option("--bases", gen_bases, "bases per semiprime")->capture_default_str();

    // table1
    auto* table = app.add_subcommand("table1", "largest interesting semiprimes per qubit count");
    unsigned table_from = 5, table_to = 40;
    table->add_option("--from", table_from, "first qubit count")->capture_default_str();
    table->add_option("--to", table_to, "last qubit count")->capture_default_str();

    // simulate
    auto* sim = app.add_subcommand("simulate", "run the iterative circuit");
    u64 sim_N = 15, sim_a = 7, sim_p = 0, sim_q = 0;
    unsigned sim_t = 0, sim_shots = 1;
    std::string sim_error;
    sim->add_option("--N", sim_N, "semiprime")->required();
    sim->add_option("--a", sim_a, "base")->required();
    sim->add_option("--p", sim_p, "known factor p (verification)");
    sim->add_option("--q", sim_q, "known factor q (verification)");
    sim->add_option("--t", sim_t, "classical bits (default recommended)");
    sim->add_option("--shots", sim_shots, "bitstrings to sample")->capture_default_str();
    sim->add_option("--error", sim_error, "error model, e.g. kind=amplitude_init,delta=0.1");

    // sample-distribution
    auto* sample = app.add_subcommand("sample-distribution",
                                      "sample bitstrings from the analytic distribution");
    u64 sample_order = 4;
    unsigned sample_t = 8;
    u64 sample_count = 16;
    bool dump = false;
    sample->add_option("--order", sample_order, "known multiplicative order")->required();
    sample->add_option("--t", sample_t, "bits per bitstring")->required();
    sample->add_option("--count", sample_count, "samples")->capture_default_str();
    sample->add_flag("--dump-distribution", dump, "emit (j, p) pairs instead (t <= 20)");

    // postprocess
    auto* post = app.add_subcommand("postprocess", "classical post-processing of bitstrings");
    std::string post_mode = "shor", problem_file, bitstrings_file;
    u64 post_B = 0;
    unsigned post_c = 1, post_k = 100, post_varsigma = 1;
    post->add_option("--mode", post_mode, "shor|ekera")->capture_default_str();
    post->add_option("--problem-file", problem_file, "problem manifest")->required();
    post->add_option("--bitstrings-file", bitstrings_file, "bitstring records")->required();
    post->add_option("--B", post_B, "Ekera search radius (default L)");
    post->add_option("--c", post_c, "Ekera smoothness parameter")->capture_default_str();
    post->add_option("--k", post_k, "Ekera trial count")->capture_default_str();
    post->add_option("--varsigma", post_varsigma, "Ekera varsigma")->capture_default_str();

    // campaign
    auto* camp = app.add_subcommand("campaign", "many problems x bitstrings with statistics");
    std::string camp_L = "9:18", camp_backend = "simulator", camp_post = "shor", camp_error;
    unsigned camp_problems = 50, camp_bases = 50, camp_M = 256;
    camp->add_option("--L", camp_L, "bit lengths a:b")->capture_default_str();
    camp->add_option("--problems", camp_problems, "semiprimes per L")->capture_default_str();
    camp->add_option("--bases", camp_bases, "bases per semiprime")->capture_default_str();
    camp->add_option("--M", camp_M, "bitstrings per problem")->capture_default_str();
    camp->add_option("--backend", camp_backend, "simulator|known_order_sampler")
        ->capture_default_str();
    camp->add_option("--post", camp_post, "shor|ekera")->capture_default_str();
    camp->add_option("--error", camp_error, "error model");

    // t-sweep
    auto* tsweep = app.add_subcommand("t-sweep", "success fractions vs bit count t");
    u64 ts_N = 15707, ts_a = 833, ts_p = 0, ts_q = 0;
    std::string ts_values = "4:28";
    unsigned ts_M = 4096;
    std::string ts_post = "shor";
    tsweep->add_option("--N", ts_N, "semiprime")->required();
    tsweep->add_option("--a", ts_a, "base")->required();
    tsweep->add_option("--p", ts_p, "known factor p");
    tsweep->add_option("--q", ts_q, "known factor q");
    tsweep->add_option("--t-values", ts_values, "t range a:b or list")->capture_default_str();
    tsweep->add_option("--M", ts_M, "bitstrings per t")->capture_default_str();
    tsweep->add_option("--post", ts_post, "shor|ekera")->capture_default_str();

    // error-sweep
    auto* esweep = app.add_subcommand("error-sweep", "success vs effective error probability");
    u64 es_N = 0, es_a = 0, es_p = 0, es_q = 0;
    std::string es_kind = "classical_measure", es_points = "0,0.001,0.005,0.01,0.05";
    unsigned es_M = 512;
    std::string es_post = "ekera";
    esweep->add_option("--N", es_N, "semiprime")->required();
    esweep->add_option("--a", es_a, "base")->required();
    esweep->add_option("--p", es_p, "known factor p");
    esweep->add_option("--q", es_q, "known factor q");
    esweep->add_option("--kind", es_kind, "error kind")->capture_default_str();
    esweep->add_option("--p-errors", es_points, "effective error probabilities, comma list")
        ->capture_default_str();
    esweep->add_option("--M", es_M, "bitstrings per point")->capture_default_str();
    esweep->add_option("--post", es_post, "shor|ekera")->capture_default_str();

    // bounds
    auto* bounds = app.add_subcommand("bounds", "theoretical bound calculators");
    u64 bounds_N = 0, bounds_order = 0;
    unsigned bounds_L = 0, bounds_t = 0;
    bounds->add_option("--N", bounds_N, "semiprime for the Shor bound");
    bounds->add_option("--L", bounds_L, "bit length for the Ekera bound");
    bounds->add_option("--t", bounds_t, "bits per string for the Ekera bound (default 2L)");
    bounds->add_option("--order", bounds_order, "order for the Rosser-Schoenfeld bound");

    try {
        app.parse(argc, argv);

        SimulatorOptions sim_options;
        sim_options.shard_count = shards;
        sim_options.workers = workers;
        sim_options.qubit_ceiling = qubit_ceiling;

        if (*gen) {
            std::ostringstream os;
            os << json{{"schema", "shorsim/problems"}, {"version", 1},
                       {"seed", std::to_string(seed)}}.dump()
               << "\n";
            for (unsigned L : parse_range(gen_L)) {
                auto problems = generate_campaign_problems(
                    L, gen_count, gen_bases, derive_seed(seed, L, RngDomain::problem_seed));
                for (const auto& p : problems) os << problem_to_json(p) << "\n";
            }
            emit(out_path, os.str());
        } else if (*table) {
            std::ostringstream os;
            os << json{{"schema", "shorsim/table1"}, {"version", 1}}.dump() << "\n";
            for (unsigned n = table_from; n <= table_to; ++n) {
                auto rec = largest_interesting_semiprime(n);
                if (!rec) continue;
                os << json{{"qubits", rec->n_qubits},
                           {"N", std::to_string(rec->N)},
                           {"p", std::to_string(rec->p)},
                           {"q", std::to_string(rec->q)},
                           {"t", rec->t_recommended}}
                          .dump()
                   << "\n";
            }
            emit(out_path, os.str());
        } else if (*sim) {
            FactoringProblem prob = problem_from_flags(sim_N, sim_a, sim_p, sim_q, sim_t);
            ErrorConfig error =
                sim_error.empty() ? ErrorConfig::none_config() : parse_error_config(sim_error);
            emit(out_path, simulate_to_jsonl(prob, error, sim_shots, seed, sim_options));
        } else if (*sample) {
            DistributionSpec spec = make_distribution_spec(sample_order, sample_t);
            std::ostringstream os;
            if (dump) {
                if (sample_t > 20) throw ConfigError("--dump-distribution requires t <= 20");
                os << json{{"schema", "shorsim/distribution"}, {"version", 1},
                           {"order", std::to_string(sample_order)}, {"t", sample_t}}.dump()
                   << "\n";
                for (u128 j = 0; j < (u128{1} << sample_t); ++j) {
                    double p = shor_distribution_prob(spec, j);
                    if (p > 0.0)
                        os << json{{"j", to_string_u128(j)}, {"p", p}}.dump() << "\n";
                }
            } else {
                os << json{{"schema", "shorsim/samples"}, {"version", 1},
                           {"order", std::to_string(sample_order)}, {"t", sample_t},
                           {"seed", std::to_string(seed)},
                           {"integration_subregions", 64},
                           {"integration_rel_error", 1e-6}}.dump()
                   << "\n";
                KnownOrderSampler sampler(spec);
                for (u64 i = 0; i < sample_count; ++i) {
                    RngStream rng(seed, static_cast<u32>(i), 0, RngDomain::sampler);
                    os << json{{"j", to_string_u128(sampler.sample(rng))}}.dump() << "\n";
                }
            }
            emit(out_path, os.str());
        } else if (*post) {
            auto problems = read_problem_manifest(problem_file);
            if (problems.empty()) throw ConfigError("empty problem manifest");
            const FactoringProblem& prob = problems.front();
            std::optional<u64> known_order;
            if (prob.p && prob.q)
                known_order =
                    multiplicative_order(prob.a, prob.N, std::make_pair(*prob.p, *prob.q)).value;
            EkeraParams params = EkeraParams::for_problem(prob.L, prob.t);
            if (post_B != 0) params.B = post_B;
            params.c = post_c;
            params.k = post_k;
            params.varsigma = post_varsigma;
            PostMode mode = post_mode_from_name(post_mode);
            std::ostringstream os;
            os << json{{"schema", "shorsim/outcomes"}, {"version", 1},
                       {"mode", post_mode}}.dump()
               << "\n";
            std::istringstream in(read_text_file(bitstrings_file));
            std::string line;
            u64 index = 0;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                json record = json::parse(line);
                if (record.contains("schema")) continue;
                if (record.contains("record") && record["record"] != "bitstring") continue;
                u128 j = parse_u128(record.at("j").get<std::string>());
                PostProcessOutcome outcome;
                if (mode == PostMode::shor) {
                    outcome =
                        shor_standard_procedure(j, prob.t, prob.N, prob.a, known_order);
                } else {
                    RngStream rng(seed, static_cast<u32>(index), 1, RngDomain::postprocess);
                    outcome = ekera_postprocess(j, prob.t, prob.N, prob.a, params, rng,
                                                known_order);
                }
                json o{{"j", to_string_u128(j)},
                       {"k", to_string_u128(outcome.convergent.k)},
                       {"r", to_string_u128(outcome.convergent.r)},
                       {"checks",
                        {{"r_even", outcome.checks.r_even},
                         {"a_r_is_one", outcome.checks.a_r_is_one},
                         {"a_half_not_minus_one", outcome.checks.a_half_not_minus_one}}},
                       {"classification", classification_name(outcome.classification)}};
                json factors = json::array();
                for (u64 f : outcome.factors) factors.push_back(std::to_string(f));
                o["factors"] = factors;
                if (outcome.order_match) o["order_match"] = *outcome.order_match;
                if (outcome.recovered_order)
                    o["recovered_order"] = std::to_string(*outcome.recovered_order);
                if (outcome.candidate_offset) o["candidate_offset"] = *outcome.candidate_offset;
                os << o.dump() << "\n";
                ++index;
            }
            emit(out_path, os.str());
        } else if (*camp) {
            CampaignSpec spec;
            auto range = parse_range(camp_L);
            spec.L_min = range.front();
            spec.L_max = range.back();
            spec.problems_per_L = camp_problems;
            spec.bases_per_N = camp_bases;
            spec.M = camp_M;
            spec.backend = backend_from_name(camp_backend);
            spec.post_mode = post_mode_from_name(camp_post);
            spec.error =
                camp_error.empty() ? ErrorConfig::none_config() : parse_error_config(camp_error);
            spec.sim = sim_options;
            spec.sim.workers = 1; // problems are the parallel unit
            CampaignResult result = run_campaign(spec, seed, workers);
            emit(out_path, campaign_to_jsonl(result));
        } else if (*tsweep) {
            FactoringProblem prob = problem_from_flags(ts_N, ts_a, ts_p, ts_q, 0);
            auto points = t_sweep(prob, parse_range(ts_values), ts_M,
                                  post_mode_from_name(ts_post), ErrorConfig::none_config(), seed,
                                  sim_options, workers);
            std::ostringstream os;
            os << json{{"schema", "shorsim/t-sweep"}, {"version", 1},
                       {"N", std::to_string(ts_N)}, {"a", std::to_string(ts_a)}}.dump()
               << "\n";
            for (const auto& pt : points)
                os << json{{"t", pt.t}, {"success", pt.success}, {"lucky", pt.lucky},
                           {"fail", pt.fail}}.dump()
                   << "\n";
            emit(out_path, os.str());
        } else if (*esweep) {
            FactoringProblem prob = problem_from_flags(es_N, es_a, es_p, es_q, 0);
            std::vector<double> p_errors;
            std::stringstream ss(es_points);
            std::string item;
            while (std::getline(ss, item, ',')) p_errors.push_back(std::stod(item));
            auto points = error_sweep(prob, error_kind_from_name(es_kind), p_errors, es_M,
                                      post_mode_from_name(es_post), seed, sim_options, workers);
            std::ostringstream os;
            os << json{{"schema", "shorsim/error-sweep"}, {"version", 1},
                       {"N", std::to_string(es_N)}, {"kind", es_kind}}.dump()
               << "\n";
            for (const auto& pt : points)
                os << json{{"p_error", pt.p_error}, {"delta", pt.delta},
                           {"success", pt.success}, {"reference", pt.reference}}.dump()
                   << "\n";
            emit(out_path, os.str());
        } else if (*bounds) {
            std::ostringstream os;
            json j{{"schema", "shorsim/bounds"}, {"version", 1}};
            os << j.dump() << "\n";
            if (bounds_N != 0) {
                ShorBound b = shor_bound(bounds_N);
                os << json{{"bound", "shor"}, {"N", std::to_string(bounds_N)},
                           {"peak_factor", b.peak_factor}, {"coprime_factor", b.coprime_factor},
                           {"parity_factor", b.parity_factor}, {"value", b.value}}.dump()
                   << "\n";
            }
            if (bounds_L != 0) {
                unsigned t = bounds_t != 0 ? bounds_t : 2 * bounds_L;
                EkeraParams params = EkeraParams::for_problem(bounds_L, t);
                os << json{{"bound", "ekera"}, {"L", bounds_L}, {"t", t},
                           {"B", params.B}, {"c", params.c}, {"k", params.k},
                           {"varsigma", params.varsigma},
                           {"value", ekera_bound(params, bounds_L)}}.dump()
                   << "\n";
            }
            if (bounds_order != 0) {
                os << json{{"bound", "rosser"}, {"order", std::to_string(bounds_order)},
                           {"value", rosser_bound(bounds_order)}}.dump()
                   << "\n";
            }
            emit(out_path, os.str());
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const BudgetExceededError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const CeilingExceededError& e) {
        std::cerr << "qubit ceiling exceeded: " << e.what() << "\n";
        return 3;
    } catch (const FactorizationTimeoutError& e) {
        std::cerr << "factorization budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
