#pragma once

// String-match schema linking: slice a question into typed spans (table,
// column, value, plain) by scanning n-grams longest-first against schema
// names, then type schema columns by how strongly question spans match
// them. Quoted phrases become value spans, resolved to columns through a
// knowledge source.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semql/errors.hpp"
#include "semql/knowledge.hpp"
#include "semql/schema.hpp"
#include "semql/util.hpp"

namespace semql {

enum class SpanType { table, column, value, plain };

inline const char* span_type_name(SpanType t) {
    switch (t) {
        case SpanType::table: return "table";
        case SpanType::column: return "column";
        case SpanType::value: return "value";
        case SpanType::plain: return "plain";
    }
    return "plain";
}

/// Column link strength; listed weakest to strongest so larger enum values
/// win when merging.
enum class ColumnLinkType { none, value_partial, value_exact, partial, exact };

inline const char* column_link_name(ColumnLinkType t) {
    switch (t) {
        case ColumnLinkType::none: return "none";
        case ColumnLinkType::value_partial: return "value_partial";
        case ColumnLinkType::value_exact: return "value_exact";
        case ColumnLinkType::partial: return "partial";
        case ColumnLinkType::exact: return "exact";
    }
    return "none";
}

struct QuestionToken {
    std::string text;    // lower-cased; quotes stripped for quoted phrases
    std::size_t begin;   // byte offsets into the question
    std::size_t end;
    bool quoted = false;

    friend bool operator==(const QuestionToken&, const QuestionToken&) = default;
};

struct Span {
    std::vector<std::string> tokens;
    std::size_t begin = 0;  // token positions [begin, end)
    std::size_t end = 0;
    SpanType type = SpanType::plain;

    friend bool operator==(const Span&, const Span&) = default;
};

struct LinkResult {
    std::vector<Span> spans;
    std::map<std::string, ColumnLinkType> column_types;  // by lower column name
    bool degraded = false;  // value linking skipped after a source failure
    std::string warning;
};

/// Suffix-strip lemmatizer: enough to align plural schema names and question
/// words (cities -> city, types -> type, pets -> pet).
inline std::string lemma(std::string_view word) {
    std::string w = to_lower(word);
    if (w.size() > 3 && w.ends_with("ies")) return w.substr(0, w.size() - 3) + "y";
    if (w.size() > 3 && w.ends_with("es") && !w.ends_with("ses")) {
        std::string base = w.substr(0, w.size() - 2);
        if (base.ends_with("sh") || base.ends_with("ch") || base.ends_with("x") ||
            base.ends_with("s"))
            return base;
        return w.substr(0, w.size() - 1);  // e.g. "types" -> "type"
    }
    if (w.size() > 2 && w.ends_with("s") && !w.ends_with("ss"))
        return w.substr(0, w.size() - 1);
    return w;
}

/// Splits a question into word tokens. A single-quoted phrase becomes one
/// quoted token with the quotes stripped.
inline std::vector<QuestionToken> tokenize_question(std::string_view question) {
    std::vector<QuestionToken> tokens;
    std::size_t i = 0;
    while (i < question.size()) {
        char c = question[i];
        if (c == '\'') {
            std::size_t start = i;
            std::size_t close = question.find('\'', i + 1);
            if (close == std::string_view::npos) {
                // Unmatched quote: treat it as punctuation and move on.
                ++i;
                continue;
            }
            std::string text = to_lower(question.substr(i + 1, close - i - 1));
            if (!text.empty())
                tokens.push_back(QuestionToken{std::move(text), start, close + 1, true});
            i = close + 1;
        } else if (std::isalnum(static_cast<unsigned char>(c))) {
            std::size_t start = i;
            std::string text;
            while (i < question.size() &&
                   (std::isalnum(static_cast<unsigned char>(question[i])) ||
                    question[i] == '_')) {
                text.push_back(
                    static_cast<char>(std::tolower(static_cast<unsigned char>(question[i]))));
                ++i;
            }
            tokens.push_back(QuestionToken{std::move(text), start, i, false});
        } else {
            ++i;
        }
    }
    return tokens;
}

namespace detail {

struct NamedTokens {
    std::string key;                   // lower original name
    std::vector<std::string> lemmas;   // lemmatized name parts
};

inline std::vector<NamedTokens> column_name_index(const Schema& schema) {
    std::vector<NamedTokens> index;
    for (const Table& table : schema.tables) {
        for (const Column& column : table.columns) {
            std::string key = to_lower(column.original_name);
            bool seen = false;
            for (const NamedTokens& existing : index)
                if (existing.key == key) seen = true;
            if (seen) continue;
            NamedTokens entry;
            entry.key = key;
            for (const std::string& token : column.tokens)
                entry.lemmas.push_back(lemma(token));
            index.push_back(std::move(entry));
        }
    }
    return index;
}

inline std::vector<NamedTokens> table_name_index(const Schema& schema) {
    std::vector<NamedTokens> index;
    for (const Table& table : schema.tables) {
        NamedTokens entry;
        entry.key = to_lower(table.name);
        for (const std::string& token : tokenize_name(table.name))
            entry.lemmas.push_back(lemma(token));
        index.push_back(std::move(entry));
    }
    return index;
}

inline bool sequence_equal(const std::vector<std::string>& a,
                           const std::vector<std::string>& b) {
    return a == b;
}

/// Multiset containment: every word of `part`, with multiplicity, occurs in
/// `whole`.
inline bool multiset_subset(const std::vector<std::string>& part,
                            const std::vector<std::string>& whole) {
    if (part.empty()) return false;
    std::vector<bool> used(whole.size(), false);
    for (const std::string& word : part) {
        bool found = false;
        for (std::size_t i = 0; i < whole.size(); ++i) {
            if (!used[i] && whole[i] == word) {
                used[i] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace detail

/// Slices the question into non-overlapping typed spans covering every
/// token. N-grams are scanned longest first (6 down to 1), left to right
/// within a length; the first matching tier wins: exact column, exact
/// table, quoted value, column word-subset, table word-subset. Uncovered
/// tokens become plain spans.
inline std::vector<Span> recognize_spans(const std::vector<QuestionToken>& tokens,
                                         const Schema& schema) {
    std::vector<detail::NamedTokens> columns = detail::column_name_index(schema);
    std::vector<detail::NamedTokens> tables = detail::table_name_index(schema);

    std::size_t n = tokens.size();
    std::vector<bool> taken(n, false);
    std::vector<Span> spans;

    std::size_t max_len = n < 6 ? n : 6;
    for (std::size_t len = max_len; len >= 1; --len) {
        for (std::size_t begin = 0; begin + len <= n; ++begin) {
            bool overlaps = false;
            for (std::size_t k = begin; k < begin + len; ++k)
                if (taken[k]) overlaps = true;
            if (overlaps) continue;

            std::vector<std::string> words;
            std::vector<std::string> lemmas;
            for (std::size_t k = begin; k < begin + len; ++k) {
                words.push_back(tokens[k].text);
                lemmas.push_back(lemma(tokens[k].text));
            }

            std::optional<SpanType> matched;
            for (const detail::NamedTokens& column : columns)
                if (detail::sequence_equal(lemmas, column.lemmas)) {
                    matched = SpanType::column;
                    break;
                }
            if (!matched)
                for (const detail::NamedTokens& table : tables)
                    if (detail::sequence_equal(lemmas, table.lemmas)) {
                        matched = SpanType::table;
                        break;
                    }
            if (!matched && len == 1 && tokens[begin].quoted) matched = SpanType::value;
            if (!matched)
                for (const detail::NamedTokens& column : columns)
                    if (detail::multiset_subset(lemmas, column.lemmas)) {
                        matched = SpanType::column;
                        break;
                    }
            if (!matched)
                for (const detail::NamedTokens& table : tables)
                    if (detail::multiset_subset(lemmas, table.lemmas)) {
                        matched = SpanType::table;
                        break;
                    }
            if (!matched) continue;

            spans.push_back(Span{std::move(words), begin, begin + len, *matched});
            for (std::size_t k = begin; k < begin + len; ++k) taken[k] = true;
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        if (!taken[i])
            spans.push_back(Span{{tokens[i].text}, i, i + 1, SpanType::plain});

    std::sort(spans.begin(), spans.end(),
              [](const Span& a, const Span& b) { return a.begin < b.begin; });
    return spans;
}

/// Types every distinct column name by the strongest column span matching
/// it: exact when some span's lemmas equal the column's, partial when a
/// span's words are a subset.
inline std::map<std::string, ColumnLinkType> assign_column_types(
    const std::vector<Span>& spans, const Schema& schema) {
    std::vector<detail::NamedTokens> columns = detail::column_name_index(schema);
    std::map<std::string, ColumnLinkType> types;
    for (const detail::NamedTokens& column : columns)
        types[column.key] = ColumnLinkType::none;
    for (const Span& span : spans) {
        if (span.type != SpanType::column) continue;
        std::vector<std::string> lemmas;
        for (const std::string& word : span.tokens) lemmas.push_back(lemma(word));
        for (const detail::NamedTokens& column : columns) {
            ColumnLinkType strength = ColumnLinkType::none;
            if (detail::sequence_equal(lemmas, column.lemmas))
                strength = ColumnLinkType::exact;
            else if (detail::multiset_subset(lemmas, column.lemmas))
                strength = ColumnLinkType::partial;
            if (strength > types[column.key]) types[column.key] = strength;
        }
    }
    return types;
}

struct ValueLinkResult {
    std::map<std::string, ColumnLinkType> updates;
    bool degraded = false;
    std::string warning;
};

/// Resolves value spans to columns through the knowledge source: each
/// related term is matched against column names like a column span, but
/// yields the weaker value_exact / value_partial types. A source failure
/// degrades value linking instead of failing the whole link.
inline ValueLinkResult link_value_spans(const std::vector<Span>& spans,
                                        KnowledgeSource& source, const Schema& schema) {
    std::vector<detail::NamedTokens> columns = detail::column_name_index(schema);
    ValueLinkResult result;
    for (const Span& span : spans) {
        if (span.type != SpanType::value) continue;
        std::string phrase = join(span.tokens, " ");
        std::vector<std::string> related;
        try {
            related = source.lookup(phrase);
        } catch (const KnowledgeSourceError& e) {
            result.degraded = true;
            result.warning = std::string("value linking degraded: ") + e.what();
            break;
        }
        for (const std::string& term : related) {
            std::vector<std::string> lemmas;
            for (const std::string& word : tokenize_name(term))
                lemmas.push_back(lemma(word));
            for (const detail::NamedTokens& column : columns) {
                ColumnLinkType strength = ColumnLinkType::none;
                if (detail::sequence_equal(lemmas, column.lemmas))
                    strength = ColumnLinkType::value_exact;
                else if (detail::multiset_subset(lemmas, column.lemmas))
                    strength = ColumnLinkType::value_partial;
                auto it = result.updates.find(column.key);
                if (strength == ColumnLinkType::none) continue;
                if (it == result.updates.end() || strength > it->second)
                    result.updates[column.key] = strength;
            }
        }
    }
    return result;
}

/// Full pipeline: tokenize, recognize spans, type columns, then fold in
/// value links (never downgrading a stronger type). source may be null to
/// skip value linking.
inline LinkResult link_question(std::string_view question, const Schema& schema,
                                KnowledgeSource* source = nullptr) {
    LinkResult result;
    std::vector<QuestionToken> tokens = tokenize_question(question);
    result.spans = recognize_spans(tokens, schema);
    result.column_types = assign_column_types(result.spans, schema);
    if (source != nullptr) {
        ValueLinkResult values = link_value_spans(result.spans, *source, schema);
        result.degraded = values.degraded;
        result.warning = values.warning;
        for (const auto& [column, strength] : values.updates)
            if (strength > result.column_types[column])
                result.column_types[column] = strength;
    }
    return result;
}

}  // namespace semql
