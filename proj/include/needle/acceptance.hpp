#pragma once

#include <string>
#include <vector>

namespace needle {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget = 0.0;  // wall-clock limit in seconds, part of the pass condition
};

CriterionResult runCriterion(int id);
std::vector<CriterionResult> runAcceptance(const std::vector<int>& ids = {});
std::string formatCriterion(const CriterionResult& r);

constexpr int kCriterionCount = 10;

}  // namespace needle
