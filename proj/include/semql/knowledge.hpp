#pragma once

// Knowledge sources used by value linking: given a phrase, return the terms
// it is a kind of or associated with. Two categories of edge matter, "is a
// type of" and "related terms"; everything else a source knows is ignored.

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "semql/errors.hpp"
#include "semql/util.hpp"

namespace semql {

class KnowledgeSource {
public:
    virtual ~KnowledgeSource() = default;
    /// Related terms for the phrase, lower-cased, deduplicated, source order.
    /// Throws KnowledgeSourceError when the source cannot answer.
    virtual std::vector<std::string> lookup(const std::string& term) = 0;
};

/// Offline source backed by a TSV file: term <TAB> category <TAB> result.
/// Only the categories "is a type of" and "related terms" are loaded.
class FixtureKnowledgeSource : public KnowledgeSource {
public:
    explicit FixtureKnowledgeSource(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw KnowledgeSourceError("cannot open knowledge fixture '" + path + "'");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream fields(line);
            std::string term, category, result;
            if (!std::getline(fields, term, '\t') ||
                !std::getline(fields, category, '\t') ||
                !std::getline(fields, result, '\t'))
                throw KnowledgeSourceError("malformed knowledge fixture line: " + line);
            if (category != "is a type of" && category != "related terms") continue;
            std::vector<std::string>& results = entries_[to_lower(term)];
            std::string lowered = to_lower(result);
            bool seen = false;
            for (const std::string& existing : results)
                if (existing == lowered) seen = true;
            if (!seen) results.push_back(std::move(lowered));
        }
    }

    std::vector<std::string> lookup(const std::string& term) override {
        auto it = entries_.find(to_lower(term));
        return it == entries_.end() ? std::vector<std::string>{} : it->second;
    }

private:
    std::map<std::string, std::vector<std::string>> entries_;
};

/// HTTP source speaking the ConceptNet JSON shape: GET <base>/c/en/<term>
/// returns {"edges": [{"rel": {"@id": "/r/IsA"}, "start": ..., "end": ...}]}.
/// Responses are cached on disk when a cache directory is configured, so a
/// term is fetched at most once.
class HttpKnowledgeSource : public KnowledgeSource {
public:
    explicit HttpKnowledgeSource(std::string base_url, std::string cache_dir = "")
        : base_url_(std::move(base_url)), cache_dir_(std::move(cache_dir)) {}

    std::vector<std::string> lookup(const std::string& term) override {
        std::string body = fetch(to_lower(term));
        return parse_edges(body, to_lower(term));
    }

private:
    std::string base_url_;
    std::string cache_dir_;
    std::mutex cache_mutex_;

    static std::string cache_key(const std::string& term) {
        std::string key;
        for (char c : term)
            key.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
        return key + ".json";
    }

    static std::string path_term(const std::string& term) {
        std::string out;
        for (char c : term) out.push_back(c == ' ' ? '_' : c);
        return out;
    }

    std::string fetch(const std::string& term) {
        std::filesystem::path cache_file;
        if (!cache_dir_.empty()) {
            cache_file = std::filesystem::path(cache_dir_) / cache_key(term);
            std::lock_guard<std::mutex> lock(cache_mutex_);
            std::ifstream in(cache_file);
            if (in) {
                std::ostringstream body;
                body << in.rdbuf();
                return body.str();
            }
        }
        httplib::Client client(base_url_);
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(5, 0);
        httplib::Result result = client.Get("/c/en/" + path_term(term));
        if (!result)
            throw KnowledgeSourceError("lookup of '" + term + "' failed: " +
                                       httplib::to_string(result.error()));
        if (result->status != 200)
            throw KnowledgeSourceError("lookup of '" + term + "' returned status " +
                                       std::to_string(result->status));
        if (!cache_dir_.empty()) {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            std::filesystem::create_directories(cache_dir_);
            std::ofstream out(cache_file);
            out << result->body;
        }
        return result->body;
    }

    static std::vector<std::string> parse_edges(const std::string& body,
                                                const std::string& term) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw KnowledgeSourceError("malformed knowledge response: " +
                                       std::string(e.what()));
        }
        std::vector<std::string> results;
        if (!doc.contains("edges")) return results;
        for (const auto& edge : doc["edges"]) {
            std::string rel = edge.value("rel", nlohmann::json::object()).value("@id", "");
            if (rel != "/r/IsA" && rel != "/r/RelatedTo") continue;
            // Take the node on the other side of the edge from the term.
            for (const char* side : {"start", "end"}) {
                const auto node = edge.value(side, nlohmann::json::object());
                if (node.value("language", "en") != std::string("en")) continue;
                std::string label = to_lower(node.value("label", ""));
                if (label.empty() || label == term) continue;
                bool seen = false;
                for (const std::string& existing : results)
                    if (existing == label) seen = true;
                if (!seen) results.push_back(label);
            }
        }
        return results;
    }
};

}  // namespace semql
