// Reads a JSON array of program texts on stdin and prints a JSON array of
// verdicts (true = valid) from the embedded checker.

#include "stap/python_syntax.hpp"

#include "json.hpp"

#include <iostream>
#include <iterator>

int main() {
    std::string input((std::istreambuf_iterator<char>(std::cin)), {});
    auto sources = nlohmann::json::parse(input);
    stap::EmbeddedPythonChecker checker;
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& s : sources) verdicts.push_back(checker.check(s.get<std::string>()).valid);
    std::cout << verdicts.dump() << "\n";
    return 0;
}
