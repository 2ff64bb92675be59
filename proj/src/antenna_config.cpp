#include "ia/antenna_config.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace ia {

AntennaConfig::AntennaConfig(std::vector<int> rx_counts, std::vector<int> tx_counts)
    : rx_(std::move(rx_counts)), tx_(std::move(tx_counts)) {
    if (rx_.empty() || rx_.size() != tx_.size())
        throw UsageError("antenna configuration needs equally many RX and TX counts, at least one user");
    for (std::size_t i = 0; i < rx_.size(); ++i) {
        if (rx_[i] < 1 || tx_[i] < 1) throw UsageError("antenna counts must be >= 1");
        rx_total_ += rx_[i];
        tx_total_ += tx_[i];
    }
}

int AntennaConfig::rx_offset(int user) const {
    check(user);
    return std::accumulate(rx_.begin(), rx_.begin() + (user - 1), 0);
}

int AntennaConfig::tx_offset(int user) const {
    check(user);
    return std::accumulate(tx_.begin(), tx_.begin() + (user - 1), 0);
}

namespace {

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;

    void skip_space() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_space();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream msg;
        msg << "config parse error at offset " << pos << ": " << what;
        if (pos < text.size()) msg << " (found '" << text[pos] << "')";
        throw UsageError(msg.str());
    }

    int number() {
        skip_space();
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) fail("expected an integer");
        long v = std::stol(std::string(text.substr(start, pos - start)));
        if (v < 1 || v > 1'000'000) fail("count out of range");
        return static_cast<int>(v);
    }
};

}  // namespace

AntennaConfig AntennaConfig::parse(std::string_view text) {
    Cursor c{text};
    if (!c.eat('[')) c.fail("expected '['");
    std::vector<int> rx, tx;
    for (;;) {
        if (!c.eat('(')) c.fail("expected '('");
        int n = c.number();
        if (!c.eat(',')) c.fail("expected ','");
        int m = c.number();
        if (!c.eat(')')) c.fail("expected ')'");
        int repeat = 1;
        if (c.eat('^')) repeat = c.number();
        for (int r = 0; r < repeat; ++r) {
            rx.push_back(n);
            tx.push_back(m);
        }
        if (c.eat(']')) break;
        if (!c.eat('.')) c.fail("expected '.' or ']'");
    }
    c.skip_space();
    if (c.pos != text.size()) c.fail("trailing characters after ']'");
    return {std::move(rx), std::move(tx)};
}

std::string AntennaConfig::to_string() const {
    std::ostringstream out;
    out << '[';
    for (int i = 0; i < users(); ++i) {
        if (i) out << '.';
        out << '(' << rx_[i] << ',' << tx_[i] << ')';
    }
    out << ']';
    return out.str();
}

namespace {

std::vector<int> normalize_set(std::vector<int> ids) {
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw UsageError("duplicate user index in sub-IC set");
    if (!ids.empty() && ids.front() < 1) throw UsageError("user indices are 1-based");
    return ids;
}

}  // namespace

SubIC::SubIC(std::vector<int> rx_set, std::vector<int> tx_set)
    : rx(normalize_set(std::move(rx_set))), tx(normalize_set(std::move(tx_set))) {}

SubIC SubIC::full(int users) {
    std::vector<int> all(static_cast<std::size_t>(users));
    std::iota(all.begin(), all.end(), 1);
    return SubIC{all, all};
}

bool SubIC::is_full(int users) const {
    return static_cast<int>(rx.size()) == users && static_cast<int>(tx.size()) == users;
}

bool SubIC::rx_contains(int user) const { return std::binary_search(rx.begin(), rx.end(), user); }
bool SubIC::tx_contains(int user) const { return std::binary_search(tx.begin(), tx.end(), user); }

bool SubIC::strictly_inside(const SubIC& other) const {
    auto strict_subset = [](const std::vector<int>& a, const std::vector<int>& b) {
        return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
    };
    return strict_subset(rx, other.rx) && strict_subset(tx, other.tx);
}

std::string SubIC::key() const {
    std::ostringstream out;
    out << "R";
    for (int i : rx) out << ':' << i;
    out << "|T";
    for (int j : tx) out << ':' << j;
    return out.str();
}

AntennaConfig apply_reduction(const AntennaConfig& config, const std::vector<int>& rx_removals,
                              const std::vector<int>& tx_removals) {
    std::vector<int> rx = config.rx_counts();
    std::vector<int> tx = config.tx_counts();
    auto remove_at = [&](std::vector<int>& counts, int user, const char* side) {
        if (user < 1 || user > config.users()) throw UsageError("removal index out of range");
        if (counts[user - 1] <= 1) {
            throw UsageError(std::string("removal would drop ") + side + " " + std::to_string(user) +
                             " below one antenna");
        }
        --counts[user - 1];
    };
    for (int i : rx_removals) remove_at(rx, i, "RX");
    for (int j : tx_removals) remove_at(tx, j, "TX");
    return {std::move(rx), std::move(tx)};
}

}  // namespace ia
