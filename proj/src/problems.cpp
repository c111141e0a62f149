#include "shorsim/problems.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "shorsim/errors.hpp"
#include "shorsim/numtheory.hpp"

namespace shorsim {

using json = nlohmann::json;

unsigned bit_length_u64(u64 n) { return bit_length(u128{n}); }

unsigned recommended_t(u64 n) {
    if (n < 2) throw std::invalid_argument("recommended_t: N >= 2");
    u128 n2 = u128{n} * n;
    unsigned t = 0;
    while ((u128{1} << t) < n2) ++t;
    return t;
}

namespace {

u64 isqrt_u64(u64 n) {
    u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && u128{r} * r > n) --r;
    while (u128{r + 1} * (r + 1) <= n) ++r;
    return r;
}

unsigned decimal_digits(u64 n) {
    unsigned d = 0;
    while (n != 0) { ++d; n /= 10; }
    return d;
}

// Smallest prime factor of an odd candidate, or n itself when prime.
u64 smallest_factor(u64 n) {
    if (is_probable_prime(n)) return n;
    auto factors = factorize(n);
    return factors.front().prime;
}

} // namespace

FactoringProblem generate_uniform_problem(unsigned L, u64 seed) {
    if (L < 4) throw std::invalid_argument("generate_uniform_problem: L >= 4");
    RngStream rng(seed, 0, 0, RngDomain::problem_gen);
    u64 p_hi = isqrt_u64(u64{1} << L);
    u64 odd_count = (p_hi - 3) / 2 + 1; // odd candidates 3, 5, ..., <= p_hi
    const unsigned q_retries = 64 * L;
    for (;;) {
        u64 p;
        do {
            p = 3 + 2 * rng.below(odd_count);
        } while (!is_probable_prime(p));
        u64 q_lo = ((u64{1} << (L - 1)) + p - 1) / p;
        u64 q_hi = (u64{1} << L) / p;
        if (q_hi < q_lo) continue;
        for (unsigned attempt = 0; attempt < q_retries; ++attempt) {
            u64 q = q_lo + rng.below(q_hi - q_lo + 1);
            if (q <= p || !is_probable_prime(q)) continue;
            u64 n = p * q;
            if (bit_length_u64(n) != L) continue;
            FactoringProblem prob;
            prob.N = n;
            prob.p = p;
            prob.q = q;
            prob.L = L;
            prob.t = recommended_t(n);
            prob.seed = seed;
            prob.a = pick_base(n, rng).a;
            return prob;
        }
        // no prime q found for this p; draw a fresh p
    }
}

BasePick pick_base(u64 n, RngStream& rng) {
    if (n < 4) throw std::invalid_argument("pick_base: composite N >= 4 expected");
    BasePick pick{0, std::nullopt};
    for (;;) {
        u64 a = 2 + rng.below(n - 2); // uniform over {2, ..., N-1}
        u64 g = gcd_u64(a, n);
        if (g == 1) {
            pick.a = a;
            return pick;
        }
        // a shares a factor with N: that alone factors N classically; report
        // it and resample for the quantum run.
        if (!pick.incidental_factor) pick.incidental_factor = g;
    }
}

std::optional<SemiprimeRecord> largest_interesting_semiprime(unsigned n_qubits) {
    if (n_qubits < 2 || n_qubits > 51)
        throw std::invalid_argument("largest_interesting_semiprime: supported up to 51 qubits");
    if (n_qubits < 5) return std::nullopt; // 15 = 3*5 is the smallest candidate
    unsigned bits = n_qubits - 1;
    for (u64 n = (u64{1} << bits) - 1;; n -= 2) {
        u64 p = smallest_factor(n);
        if (p != n) {
            u64 q = n / p;
            if (p != q && is_probable_prime(q) && decimal_digits(p) == decimal_digits(q))
                return SemiprimeRecord{n_qubits, n, p, q, recommended_t(n)};
        }
        if (n < 15) return std::nullopt;
    }
}

std::string problem_to_json(const FactoringProblem& p) {
    json j;
    j["N"] = std::to_string(p.N);
    j["a"] = std::to_string(p.a);
    j["L"] = p.L;
    j["t"] = p.t;
    if (p.p) j["p"] = std::to_string(*p.p);
    if (p.q) j["q"] = std::to_string(*p.q);
    j["seed"] = std::to_string(p.seed);
    return j.dump();
}

FactoringProblem problem_from_json(const std::string& line) {
    json j = json::parse(line);
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

void write_problem_manifest(const std::string& path,
                            const std::vector<FactoringProblem>& problems) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << json{{"schema", "shorsim/problems"}, {"version", 1}}.dump() << "\n";
    for (const auto& p : problems) out << problem_to_json(p) << "\n";
}

std::vector<FactoringProblem> read_problem_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<FactoringProblem> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            json j = json::parse(line);
            if (j.contains("schema")) continue; // header
        }
        out.push_back(problem_from_json(line));
    }
    return out;
}

} // namespace shorsim
