// Prints one PASS/FAIL line per criterion. Arguments select criteria by number.
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "needle/acceptance.hpp"

int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    if (ids.empty())
        for (int i = 1; i <= needle::kCriterionCount; ++i) ids.push_back(i);
    int failed = 0;
    for (int id : ids) {
        needle::CriterionResult r = needle::runCriterion(id);
        std::cout << needle::formatCriterion(r) << std::endl;
        failed += r.pass ? 0 : 1;
    }
    std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
