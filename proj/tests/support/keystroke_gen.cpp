#include "keystroke_gen.hpp"

#include "stap/util.hpp"

#include <random>

namespace stap::testing {

namespace {

class Editor {
public:
    Editor(std::uint64_t seed) : rng_(static_cast<std::mt19937::result_type>(seed)) {}

    std::vector<Snapshot> out;
    std::vector<std::string> lines;

    bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    void save(std::string suffix = {}) {
        std::string text;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            text += lines[i];
            if (i + 1 == lines.size()) text += suffix;
            text.push_back('\n');
        }
        ts_ += pick(40, 600);
        out.push_back({index_++, ts_, text});
    }

    void type_into(std::size_t line, const std::string& text) {
        for (char c : text) {
            if (c != ' ' && chance(0.04)) {
                lines[line].push_back(static_cast<char>('a' + pick(0, 25)));
                save();
                lines[line].pop_back();
                save();
            }
            lines[line].push_back(c);
            save();
            if (chance(0.03)) save();             // idle autosave
            if (chance(0.02)) save("   ");         // cosmetic trailing spaces
        }
    }

    void erase_line(std::size_t line) {
        while (!lines[line].empty()) {
            lines[line].pop_back();
            if (chance(0.5)) save();
        }
        lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(line));
        save();
    }

private:
    std::mt19937 rng_;
    std::uint64_t index_ = 0;
    std::int64_t ts_ = 1'700'000'000'000;
};

std::string indentation_of(const std::string& line) {
    return line.substr(0, line.find_first_not_of(' ') == std::string::npos ? line.size() : line.find_first_not_of(' '));
}

} // namespace

std::vector<Snapshot> synthesize_keystroke_log(const std::string& target, std::uint64_t seed) {
    Editor ed(seed);
    auto target_lines = split_lines(target);
    if (!target_lines.empty() && target_lines.back().empty()) target_lines.pop_back();
    ed.save();  // empty editor

    for (std::size_t li = 0; li < target_lines.size(); ++li) {
        const std::string& want = target_lines[li];
        ed.lines.push_back({});
        ed.save();
        std::string indent = indentation_of(want);
        ed.lines.back() = indent;
        ed.type_into(ed.lines.size() - 1, want.substr(indent.size()));

        // Trace print after a simple statement, removed a few keystrokes later.
        char last = want.empty() ? ' ' : want.back();
        if (last != ':' && ed.chance(0.25)) {
            ed.lines.push_back(indent);
            std::size_t at = ed.lines.size() - 1;
            ed.type_into(at, ed.chance(0.5) ? "print(len(values))" : "print(\"here\")");
            for (int k = ed.pick(0, 2); k > 0; --k) ed.save();
            ed.erase_line(at);
        }

        // Revise an earlier line: change its last character and put it back.
        if (li > 1 && ed.chance(0.15)) {
            std::size_t at = static_cast<std::size_t>(ed.pick(0, static_cast<int>(li) - 1));
            if (!ed.lines[at].empty()) {
                char keep = ed.lines[at].back();
                ed.lines[at].pop_back();
                ed.save();
                ed.lines[at].push_back(keep);
                ed.save();
            }
        }
    }
    for (int k = ed.pick(1, 3); k > 0; --k) ed.save();
    return ed.out;
}

const std::vector<std::string>& sample_programs() {
    static const std::vector<std::string> programs = {
        "n = int(input())\n"
        "values = []\n"
        "for i in range(n):\n"
        "    values.append(int(input()))\n"
        "count = 0\n"
        "in_clump = False\n"
        "for i in range(1, len(values)):\n"
        "    if values[i] == values[i - 1]:\n"
        "        if not in_clump:\n"
        "            count += 1\n"
        "            in_clump = True\n"
        "    else:\n"
        "        in_clump = False\n"
        "print(count)\n",

        "dollars = int(input())\n"
        "cents = int(input())\n"
        "n = int(input())\n"
        "total = (dollars * 100 + cents) * n\n"
        "print(total // 100, total % 100)\n",

        "word = input()\n"
        "n = len(word)\n"
        "pairs = (n - 1) // 2\n"
        "left = word[:pairs]\n"
        "middle = word[pairs:n - pairs]\n"
        "right = word[n - pairs:]\n"
        "result = \"\"\n"
        "for ch in left:\n"
        "    result += ch + \"(\"\n"
        "result += middle\n"
        "for ch in right:\n"
        "    result += \")\" + ch\n"
        "print(result)\n",

        "def area(w, h):\n"
        "    return w * h\n"
        "\n"
        "w = int(input())\n"
        "h = int(input())\n"
        "print(area(w, h))\n",
    };
    return programs;
}

} // namespace stap::testing
