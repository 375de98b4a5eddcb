#pragma once

// Chat-completions labeler over HTTP(S). Kept out of corpus.hpp so that only
// code that talks to a live endpoint pulls in the HTTP client.

#include <cstdlib>
#include <memory>
#include <optional>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "forge/corpus.hpp"
#include "forge/error.hpp"

namespace forge {

struct HttpLabelerConfig {
    std::string endpoint;  // e.g. https://host/v1/chat/completions
    std::string model;
    std::string api_key;
    int timeout_s = 60;

    /// FORGE_LABELER_ENDPOINT, FORGE_LABELER_MODEL, FORGE_LABELER_API_KEY.
    static std::optional<HttpLabelerConfig> from_env() {
        const char *endpoint = std::getenv("FORGE_LABELER_ENDPOINT");
        if (endpoint == nullptr || *endpoint == '\0') return std::nullopt;
        HttpLabelerConfig c;
        c.endpoint = endpoint;
        if (const char *m = std::getenv("FORGE_LABELER_MODEL")) c.model = m;
        if (const char *k = std::getenv("FORGE_LABELER_API_KEY")) c.api_key = k;
        return c;
    }
};

class HttpLabeler : public Labeler {
  public:
    explicit HttpLabeler(HttpLabelerConfig cfg) : cfg_(std::move(cfg)) {
        // split scheme://host[:port] from the path
        const auto scheme_end = cfg_.endpoint.find("://");
        if (scheme_end == std::string::npos) throw Error(Errc::usage, "labeler endpoint needs a scheme: " + cfg_.endpoint);
        const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
        base_ = cfg_.endpoint.substr(0, path_start);
        path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
    }

    std::string complete(const std::string &prompt) override {
        httplib::Client client(base_);
        client.set_connection_timeout(cfg_.timeout_s);
        client.set_read_timeout(cfg_.timeout_s);
        httplib::Headers headers;
        if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
        const nlohmann::json body{{"model", cfg_.model},
                                  {"temperature", 0},
                                  {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
        auto res = client.Post(path_, headers, body.dump(), "application/json");
        if (!res) throw Error(Errc::labeler_unavailable, "labeler request failed: " + httplib::to_string(res.error()));
        if (res->status == 429 || res->status >= 500) {
            throw Error(Errc::labeler_unavailable, "labeler returned HTTP " + std::to_string(res->status));
        }
        if (res->status != 200) throw Error(Errc::schema, "labeler returned HTTP " + std::to_string(res->status));
        try {
            const auto j = nlohmann::json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception &e) {
            throw Error(Errc::schema, std::string("unexpected labeler response: ") + e.what());
        }
    }

  private:
    HttpLabelerConfig cfg_;
    std::string base_;
    std::string path_;
};

} // namespace forge
