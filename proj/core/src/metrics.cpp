#include "erlab/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "erlab/errors.hpp"
#include "erlab/numeric.hpp"

namespace erlab {

double epsilon_cubed(double acc_percent, double avg_tokens) {
    if (!(avg_tokens > 0.0)) throw ConfigError("epsilon_cubed: avg_tokens must be > 0");
    if (!(acc_percent >= 0.0 && acc_percent <= 100.0)) {
        throw ConfigError("epsilon_cubed: accuracy must be a percentage in [0, 100]");
    }
    return acc_percent * acc_percent / avg_tokens;
}

EvalRecord EvalRecord::make(std::string name, double acc_percent, double avg_tokens) {
    EvalRecord rec;
    rec.name = std::move(name);
    rec.acc_percent = acc_percent;
    rec.avg_tokens = avg_tokens;
    rec.epsilon3 = epsilon_cubed(acc_percent, avg_tokens);
    return rec;
}

EvalReport eval_report(std::vector<EvalRecord> records) {
    if (records.empty()) throw ConfigError("eval_report: no records");
    std::unordered_set<std::string> names;
    for (const EvalRecord& rec : records) {
        if (!names.insert(rec.name).second) {
            throw ConfigError("eval_report: duplicate name '" + rec.name + "'");
        }
    }
    std::sort(records.begin(), records.end(),
              [](const EvalRecord& a, const EvalRecord& b) { return a.name < b.name; });

    EvalReport report;
    CompensatedSum acc, tokens, e3;
    for (const EvalRecord& rec : records) {
        acc.add(rec.acc_percent);
        tokens.add(rec.avg_tokens);
        e3.add(rec.epsilon3);
    }
    const auto n = static_cast<double>(records.size());
    report.rows = std::move(records);
    report.avg_acc = acc.value() / n;
    report.avg_tokens = tokens.value() / n;
    report.avg_epsilon3_mean_of_rows = e3.value() / n;
    report.avg_epsilon3_of_means = epsilon_cubed(report.avg_acc, report.avg_tokens);
    return report;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin])) != 0) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1])) != 0) --end;
    return s.substr(begin, end - begin);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    return fields;
}

double parse_double_field(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric field for " + what + ": '" + text + "'");
    }
}

} // namespace

std::vector<EvalRecord> parse_eval_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<EvalRecord> records;
    bool saw_header = false;
    while (std::getline(in, line)) {
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::vector<std::string> fields = split_csv_line(stripped);
        if (!saw_header) {
            if (fields.size() != 3 || fields[0] != "name" || fields[1] != "acc" ||
                fields[2] != "avg_tokens") {
                throw ConfigError("eval CSV must start with header 'name,acc,avg_tokens'");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != 3) throw ConfigError("eval CSV row needs 3 fields: " + stripped);
        records.push_back(EvalRecord::make(fields[0], parse_double_field(fields[1], "acc"),
                                           parse_double_field(fields[2], "avg_tokens")));
    }
    if (!saw_header) throw ConfigError("eval CSV is empty");
    return records;
}

void KeywordDictionary::validate() const {
    if (categories.empty()) throw ConfigError("keyword dictionary has no categories");
    std::unordered_set<std::string> seen;
    for (const KeywordCategory& cat : categories) {
        if (cat.name.empty()) throw ConfigError("keyword category with empty name");
        if (cat.phrases.empty()) {
            throw ConfigError("keyword category '" + cat.name + "' has no phrases");
        }
        for (const std::string& phrase : cat.phrases) {
            if (trim(phrase).empty()) {
                throw ConfigError("empty phrase in category '" + cat.name + "'");
            }
            if (!seen.insert(phrase).second) {
                throw ConfigError("phrase '" + phrase + "' appears in two categories");
            }
        }
    }
}

KeywordDictionary default_keyword_dictionary() {
    KeywordDictionary dict;
    dict.categories = {
        {"Soliloquize&Thinking", {"Wait", "But", "wait", "Hold on", "Alternatively"}},
        {"Check&Confirm", {"Let me confirm", "Double-check"}},
        {"Summary&Calculation", {"Remember", "Let me compute", "Therefore"}},
    };
    return dict;
}

KeywordDictionary parse_keyword_dictionary(const std::string& text) {
    KeywordDictionary dict;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        if (stripped.back() == ':') {
            dict.categories.push_back({trim(stripped.substr(0, stripped.size() - 1)), {}});
            continue;
        }
        if (dict.categories.empty()) {
            throw ConfigError("keyword dictionary: phrase before any 'category:' line");
        }
        dict.categories.back().phrases.push_back(stripped);
    }
    dict.validate();
    return dict;
}

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

// Matching normalization only; the token count stays raw.
std::string strip_punct(const std::string& token) {
    std::string out;
    out.reserve(token.size());
    for (char c : token) {
        if (std::ispunct(static_cast<unsigned char>(c)) == 0) out += c;
    }
    return out;
}

struct CompiledPhrase {
    std::size_t category_idx;
    std::vector<std::string> tokens; // punctuation-stripped
};

} // namespace

KeywordScan keyword_scan(const std::string& text, const KeywordDictionary& dict) {
    dict.validate();

    std::vector<CompiledPhrase> phrases;
    for (std::size_t c = 0; c < dict.categories.size(); ++c) {
        for (const std::string& phrase : dict.categories[c].phrases) {
            CompiledPhrase compiled{c, {}};
            for (std::string& tok : whitespace_tokens(phrase)) {
                compiled.tokens.push_back(strip_punct(tok));
            }
            phrases.push_back(std::move(compiled));
        }
    }
    // Longest first so the leftmost-longest rule is a simple first-match scan.
    std::stable_sort(phrases.begin(), phrases.end(),
                     [](const CompiledPhrase& a, const CompiledPhrase& b) {
                         return a.tokens.size() > b.tokens.size();
                     });

    const std::vector<std::string> raw_tokens = whitespace_tokens(text);
    std::vector<std::string> tokens;
    tokens.reserve(raw_tokens.size());
    for (const std::string& tok : raw_tokens) tokens.push_back(strip_punct(tok));

    std::vector<long> counts(dict.categories.size(), 0);
    std::size_t pos = 0;
    while (pos < tokens.size()) {
        std::size_t advance = 1;
        for (const CompiledPhrase& phrase : phrases) {
            const std::size_t len = phrase.tokens.size();
            if (pos + len > tokens.size()) continue;
            bool match = true;
            for (std::size_t k = 0; k < len; ++k) {
                if (tokens[pos + k] != phrase.tokens[k]) {
                    match = false;
                    break;
                }
            }
            if (match) {
                ++counts[phrase.category_idx];
                advance = len; // matched tokens are consumed
                break;
            }
        }
        pos += advance;
    }

    KeywordScan scan;
    scan.total_tokens = static_cast<long>(raw_tokens.size());
    for (std::size_t c = 0; c < dict.categories.size(); ++c) {
        CategoryCount cc;
        cc.category = dict.categories[c].name;
        cc.count = counts[c];
        cc.per_thousand_tokens =
            scan.total_tokens == 0
                ? 0.0
                : static_cast<double>(counts[c]) * 1000.0 / static_cast<double>(scan.total_tokens);
        scan.categories.push_back(std::move(cc));
    }
    return scan;
}

} // namespace erlab
