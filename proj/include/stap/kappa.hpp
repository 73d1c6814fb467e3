#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

namespace stap {

struct KappaReport {
    std::string criterion;
    std::size_t n = 0;
    std::size_t agreements = 0;
    double observed = 0.0;  // p_o
    double expected = 0.0;  // p_e
    double kappa = 0.0;     // meaningless when `undefined`
    // Both raters used one and the same category for every item: kappa is 1.
    bool degenerate = false;
    // p_e = 1 without perfect agreement; kappa has no value.
    bool undefined = false;
};

// Cohen's kappa over flat categorical labels. ValidationError on a length
// mismatch or empty input.
KappaReport cohens_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b,
                         const std::string& criterion = {});

nlohmann::json kappa_report_to_json(const KappaReport& report);

} // namespace stap
