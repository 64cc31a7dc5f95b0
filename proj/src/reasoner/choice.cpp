#include "hynpc/reasoner.hpp"

#include <cctype>

namespace hynpc::reasoner {

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Value of a digit run, saturated so that absurdly long numbers are simply out of range.
std::size_t value_of(std::string_view digits) {
    if (digits.size() > 9) return static_cast<std::size_t>(-1);
    std::size_t v = 0;
    for (char c : digits) v = v * 10 + static_cast<std::size_t>(c - '0');
    return v;
}

// Does "option" followed by whitespace end right before `pos`?
bool preceded_by_option(std::string_view text, std::size_t pos) {
    std::size_t i = pos;
    std::size_t spaces = 0;
    while (i > 0 && std::isspace(static_cast<unsigned char>(text[i - 1]))) {
        --i;
        ++spaces;
    }
    constexpr std::string_view kWord = "option";
    if (spaces == 0 || i < kWord.size()) return false;
    for (std::size_t k = 0; k < kWord.size(); ++k) {
        if (std::tolower(static_cast<unsigned char>(text[i - kWord.size() + k])) != kWord[k]) return false;
    }
    std::size_t start = i - kWord.size();
    return start == 0 || !word_char(text[start - 1]);
}

}  // namespace

std::size_t parse_choice(std::string_view text, std::size_t num_options) {
    bool saw_option = false;
    std::size_t last_option = 0;
    std::size_t last_integer = 0;
    for (std::size_t i = 0; i < text.size();) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        bool standalone = (i == 0 || !word_char(text[i - 1])) && (j == text.size() || !word_char(text[j]));
        if (standalone) {
            std::size_t v = value_of(text.substr(i, j - i));
            bool in_range = v >= 1 && v <= num_options;
            if (preceded_by_option(text, i)) {
                saw_option = true;
                if (in_range) last_option = v;
            } else if (in_range) {
                last_integer = v;
            }
        }
        i = j;
    }
    if (saw_option) {
        if (last_option != 0) return last_option;
        throw NoParsableChoice("response names no option between 1 and " + std::to_string(num_options));
    }
    if (last_integer != 0) return last_integer;
    throw NoParsableChoice("response contains no choice between 1 and " + std::to_string(num_options));
}

}  // namespace hynpc::reasoner
