#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shorsim/noise.hpp"
#include "shorsim/postprocess.hpp"
#include "shorsim/problems.hpp"
#include "shorsim/spectrum.hpp"
#include "shorsim/statevector.hpp"

namespace shorsim {

enum class Backend { simulator, known_order_sampler };
enum class PostMode { shor, ekera };

const char* backend_name(Backend b);
const char* post_mode_name(PostMode m);
Backend backend_from_name(const std::string& name);
PostMode post_mode_from_name(const std::string& name);

struct CampaignSpec {
    unsigned L_min = 9;
    unsigned L_max = 18;
    unsigned problems_per_L = 50; // distinct semiprimes
    unsigned bases_per_N = 50;    // distinct bases per semiprime
    unsigned M = 256;             // bitstrings per (N, a)
    ErrorConfig error;
    PostMode post_mode = PostMode::shor;
    Backend backend = Backend::simulator;
    SimulatorOptions sim;
    std::optional<std::vector<FactoringProblem>> explicit_problems;
};

// Fractions r/rhat among lucky bitstrings: reciprocal bins 1/D for divisors,
// an overflow bin for r > rhat, and a bin for non-divisor r.
struct RRatioHistogram {
    std::map<u64, u64> reciprocal; // D -> count (r = rhat / D)
    u64 overflow = 0;
    u64 other = 0;
    u64 total_lucky = 0;
};

struct ProblemResult {
    FactoringProblem problem;
    u64 order = 1; // ground truth, from the known factors
    unsigned M = 0;
    u64 success = 0, lucky_ne = 0, lucky_no = 0, lucky_oo = 0, fail = 0;
    std::optional<u64> first_factor_index; // 1-based bitstring index
    std::optional<u64> first_order_index;  // first bitstring whose r equals the order
    RRatioHistogram r_ratio;
    bool order_solvable = false; // order even and a^(order/2) != -1 (mod N)

    u64 lucky_total() const { return lucky_ne + lucky_no + lucky_oo; }
    double success_fraction() const { return static_cast<double>(success) / M; }
    double success_lucky_fraction() const {
        return static_cast<double>(success + lucky_total()) / M;
    }
};

struct LAggregate {
    unsigned L = 0;
    u64 problem_count = 0;
    double mean_success = 0;
    double mean_success_lucky = 0;
    double rms_success_across_N = 0;       // RMS of per-N base-averaged means
    double rms_success_lucky_across_N = 0;
    double rms_success_per_problem = 0;
    double rms_success_lucky_per_problem = 0;
};

struct CampaignResult {
    CampaignSpec spec;
    u64 seed = 0;
    std::vector<ProblemResult> problems;
    std::vector<LAggregate> aggregates;

    double overall_mean_success() const;
    double overall_mean_success_lucky() const;
};

// Distinct (N, a) pairs for one L: problems_per_L semiprimes where available,
// bases_per_N coprime bases each. Deterministic in the seed.
std::vector<FactoringProblem> generate_campaign_problems(unsigned L, unsigned problems_per_L,
                                                         unsigned bases_per_N, u64 seed);

ProblemResult run_problem(const FactoringProblem& problem, const CampaignSpec& spec);

// Problems run in parallel across workers; each problem's bitstrings run
// sequentially on its own counter-based stream, so scheduling cannot change
// any result.
CampaignResult run_campaign(const CampaignSpec& spec, u64 seed, unsigned workers);

struct FirstHitStatistics {
    std::map<u64, u64> first_factor_histogram; // index -> #problems
    std::map<u64, u64> first_order_histogram;
    u64 problems = 0;
    u64 never_factored = 0;
    u64 never_order = 0;
    double solved_by_first_fraction = 0;
    double order_by_first_fraction = 0;
    double never_factored_fraction = 0;
};
FirstHitStatistics first_hit_statistics(const CampaignResult& result);

RRatioHistogram r_ratio_histogram(const CampaignResult& result);

struct TSweepPoint {
    unsigned t;
    double success = 0, lucky = 0, fail = 0;
};
std::vector<TSweepPoint> t_sweep(const FactoringProblem& problem,
                                 const std::vector<unsigned>& t_values, unsigned M,
                                 PostMode post_mode, const ErrorConfig& error, u64 seed,
                                 const SimulatorOptions& options, unsigned workers = 1);

struct ErrorSweepPoint {
    double p_error;
    double delta;
    double success = 0;
    double reference = 0; // (1 - p_error)^t
};
std::vector<ErrorSweepPoint> error_sweep(const FactoringProblem& problem, ErrorKind kind,
                                         const std::vector<double>& p_errors, unsigned M,
                                         PostMode post_mode, u64 seed,
                                         const SimulatorOptions& options, unsigned workers = 1);

// Line-delimited output with a schema-version header; integers in decimal text.
std::string campaign_to_jsonl(const CampaignResult& result);
CampaignResult campaign_from_jsonl(const std::string& text);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// One simulate run: per-stage trace records plus the final bitstring record.
std::string simulate_to_jsonl(const FactoringProblem& problem, const ErrorConfig& error,
                              unsigned shots, u64 seed, const SimulatorOptions& options);

} // namespace shorsim
