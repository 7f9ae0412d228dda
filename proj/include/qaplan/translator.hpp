#pragma once

// Natural-language query -> intermediate representation. Two backends:
// an OpenAI-compatible chat endpoint and a deterministic fixture file
// used for goldens and evaluation.

#include <cctype>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qaplan/asp.hpp"
#include "qaplan/catalog.hpp"
#include "qaplan/errors.hpp"

namespace qaplan::translator {

struct TranslatorConfig {
    enum class Backend { Llm, Fixture };

    Backend backend = Backend::Fixture;
    std::string endpoint;      // base URL, e.g. http://localhost:8080/v1
    std::string model;
    double temperature = 0.0;
    int max_retries = 2;
    double timeout_s = 30.0;
    std::string fixtures_path;

    void check() const {
        if (temperature < 0.0 || temperature > 2.0)
            throw SchemaError("temperature must be in [0, 2]");
        if (max_retries < 0) throw SchemaError("max_retries must be >= 0");
        if (backend == Backend::Llm && (endpoint.empty() || model.empty()))
            throw SchemaError("llm backend requires endpoint and model");
        if (backend == Backend::Fixture && fixtures_path.empty())
            throw SchemaError("fixture backend requires fixtures_path");
    }
};

struct TranslationResult {
    asp::FactSet facts;
    std::string raw_response;
    int attempts = 1;
};

struct FixtureEntry {
    std::string query;
    std::string facts;           // ASP text
    std::string reference_date;  // date relative periods were resolved against
};

namespace detail {

inline std::string normalize_query(const std::string& q) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : q) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

// Discards anything outside a contiguous block of parseable atoms: tries
// line windows, largest first, until one parses to a non-empty fact set.
inline std::optional<asp::FactSet> extract_facts(const std::string& response) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : response) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    lines.push_back(current);
    for (auto& line : lines)
        if (line.starts_with("```")) line.clear();  // strip code fences

    for (std::size_t start = 0; start < lines.size(); ++start) {
        for (std::size_t end = lines.size(); end > start; --end) {
            std::string candidate;
            for (std::size_t i = start; i < end; ++i) candidate += lines[i] + "\n";
            // trim trailing junk after the last period
            auto last = candidate.find_last_of('.');
            if (last == std::string::npos) continue;
            candidate = candidate.substr(0, last + 1);
            try {
                asp::FactSet facts = asp::parse_facts(candidate);
                if (!facts.empty()) return facts;
            } catch (const SyntaxError&) {
            }
        }
    }
    return std::nullopt;
}

inline bool has_goal_atom(const asp::FactSet& facts) {
    for (const auto& a : facts)
        if (a.predicate == "_goal") return true;
    return false;
}

inline void check_intermediate(const asp::FactSet& facts) {
    for (const auto& a : facts)
        if (!a.predicate.starts_with("_"))
            throw TranslationFailed("non-intermediate predicate in translation: " +
                                    a.predicate);
    if (!has_goal_atom(facts))
        throw TranslationFailed("translation contains no _goal atom");
}

}  // namespace detail

inline std::vector<FixtureEntry> load_fixtures(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("fixtures file is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw SchemaError("fixtures file must be a JSON array");
    std::vector<FixtureEntry> out;
    for (const auto& j : doc) {
        FixtureEntry e;
        if (!j.contains("query") || !j.contains("facts"))
            throw SchemaError("fixture entry needs query and facts");
        e.query = j.at("query").get<std::string>();
        e.facts = j.at("facts").get<std::string>();
        if (j.contains("reference_date"))
            e.reference_date = j.at("reference_date").get<std::string>();
        out.push_back(std::move(e));
    }
    return out;
}

/// Pure function of the normalized query text.
inline TranslationResult translate_fixture(const std::string& query,
                                           const std::vector<FixtureEntry>& fixtures) {
    std::string key = detail::normalize_query(query);
    for (const auto& e : fixtures) {
        if (detail::normalize_query(e.query) == key) {
            TranslationResult result;
            result.raw_response = e.facts;
            result.facts = asp::parse_facts(e.facts);
            detail::check_intermediate(result.facts);
            return result;
        }
    }
    throw FixtureMiss("no fixture for query: " + query);
}

/// One chat completion round trip; returns the assistant message content
/// verbatim. Implemented in translator_http.hpp to keep the HTTP
/// dependency out of pure-logic translation units.
std::string llm_chat(const std::string& prompt, const TranslatorConfig& config);

/// Chat transport injection point for translate(); defaults to llm_chat.
using ChatFn = std::function<std::string(const std::string&, const TranslatorConfig&)>;

inline TranslationResult translate_llm(const std::string& query,
                                       const catalog::Catalog& cat,
                                       const TranslatorConfig& config,
                                       const ChatFn& chat) {
    std::string prompt = catalog::build_prompt(cat, query);
    TranslationResult result;
    for (int attempt = 1; attempt <= config.max_retries + 1; ++attempt) {
        result.attempts = attempt;
        result.raw_response = chat(prompt, config);
        auto facts = detail::extract_facts(result.raw_response);
        if (facts && detail::has_goal_atom(*facts)) {
            bool all_intermediate = true;
            for (const auto& a : *facts)
                if (!a.predicate.starts_with("_")) all_intermediate = false;
            if (all_intermediate) {
                result.facts = std::move(*facts);
                return result;
            }
        }
    }
    throw TranslationFailed("no parseable fact block with a _goal atom after " +
                            std::to_string(config.max_retries + 1) + " attempts");
}

}  // namespace qaplan::translator
