#pragma once

#include <string>
#include <vector>

namespace erlab {

// acc^2 / tokens, accuracy in percent. Penalizes redundancy while weighting
// correctness quadratically. Throws ConfigError unless avg_tokens > 0 and
// acc_percent is in [0, 100].
double epsilon_cubed(double acc_percent, double avg_tokens);

struct EvalRecord {
    std::string name;
    double acc_percent = 0.0;
    double avg_tokens = 0.0;
    double epsilon3 = 0.0; // always acc^2 / tokens

    static EvalRecord make(std::string name, double acc_percent, double avg_tokens);
};

struct EvalReport {
    std::vector<EvalRecord> rows; // sorted by name
    double avg_acc = 0.0;
    double avg_tokens = 0.0;
    // Mean of the per-row epsilon3 values. The alternative aggregation
    // (avg_acc^2 / avg_tokens) is reported alongside because the two do not
    // agree and neither is canonical.
    double avg_epsilon3_mean_of_rows = 0.0;
    double avg_epsilon3_of_means = 0.0;
};

// Throws ConfigError on duplicate names or an empty list.
EvalReport eval_report(std::vector<EvalRecord> records);

// Parses "name,acc,avg_tokens" CSV (header required).
std::vector<EvalRecord> parse_eval_csv(const std::string& text);

struct KeywordCategory {
    std::string name;
    std::vector<std::string> phrases;
};

struct KeywordDictionary {
    std::vector<KeywordCategory> categories;

    void validate() const; // nonempty phrases, no phrase in two categories
};

// The built-in reasoning-behavior taxonomy: soliloquize/thinking markers,
// check/confirm markers, summary/calculation markers.
KeywordDictionary default_keyword_dictionary();

// Override file format: a "Category name:" line opens a category; each
// following nonempty line is one phrase. '#' starts a comment line.
KeywordDictionary parse_keyword_dictionary(const std::string& text);

struct CategoryCount {
    std::string category;
    long count = 0;
    double per_thousand_tokens = 0.0;
};

struct KeywordScan {
    long total_tokens = 0;
    std::vector<CategoryCount> categories; // dictionary order
};

// Token convention: whitespace split; punctuation is stripped for matching
// only, while the frequency denominator uses the raw token count. Phrases
// match case-sensitively as contiguous token runs, resolved leftmost-longest
// with matched tokens consumed. Empty text scans to all-zero counts.
KeywordScan keyword_scan(const std::string& text, const KeywordDictionary& dict);

} // namespace erlab
