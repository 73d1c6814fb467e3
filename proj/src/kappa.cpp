#include "stap/kappa.hpp"

#include "stap/error.hpp"

#include <map>

namespace stap {

KappaReport cohens_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b,
                         const std::string& criterion) {
    if (a.size() != b.size()) {
        throw ValidationError("label vectors differ in length (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    if (a.empty()) throw ValidationError("kappa needs at least one labelled item");

    KappaReport r;
    r.criterion = criterion;
    r.n = a.size();
    std::map<std::string, std::pair<long long, long long>> marginals;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) ++r.agreements;
        ++marginals[a[i]].first;
        ++marginals[b[i]].second;
    }
    // Integer arithmetic keeps the result exactly symmetric and order independent.
    const long long n = static_cast<long long>(r.n);
    const long long n2 = n * n;
    long long chance = 0;  // sum over categories of count_a * count_b
    for (const auto& [label, counts] : marginals) chance += counts.first * counts.second;
    const long long agree = static_cast<long long>(r.agreements);

    r.observed = static_cast<double>(agree) / static_cast<double>(n);
    r.expected = static_cast<double>(chance) / static_cast<double>(n2);
    if (chance == n2) {
        if (agree == n) {
            r.kappa = 1.0;
            r.degenerate = true;
        } else {
            r.undefined = true;
        }
        return r;
    }
    r.kappa = static_cast<double>(agree * n - chance) / static_cast<double>(n2 - chance);
    return r;
}

nlohmann::json kappa_report_to_json(const KappaReport& r) {
    return {{"criterion", r.criterion},
            {"n", r.n},
            {"agreements", r.agreements},
            {"observed", r.observed},
            {"expected", r.expected},
            {"kappa", r.undefined ? nlohmann::json(nullptr) : nlohmann::json(r.kappa)},
            {"degenerate", r.degenerate},
            {"undefined", r.undefined}};
}

} // namespace stap
