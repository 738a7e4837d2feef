#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "bitext/backtranslation.hpp"
#include "bitext/cleaner.hpp"

namespace bitext {

namespace detail {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

inline ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("bad URL (missing scheme): " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::string require_env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v)
        throw std::runtime_error(std::string("environment variable not set: ") + name);
    return v;
}

inline std::string post_json(const std::string& url, const nlohmann::json& body,
                             const std::string& bearer = {}) {
    auto [base, path] = parse_url(url);
    httplib::Client client(base);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res)
        throw std::runtime_error("HTTP request failed: " + url + ": " +
                                 httplib::to_string(res.error()));
    if (res->status != 200)
        throw std::runtime_error("HTTP " + std::to_string(res->status) + " from " + url);
    return res->body;
}

}  // namespace detail

// Chat-completion client. Endpoint and key come from CLEANER_API_URL /
// CLEANER_API_KEY; request/response follow the usual chat JSON shape.
class HttpChatBackend final : public ChatBackend {
  public:
    explicit HttpChatBackend(std::string model = "gpt-4o-mini")
        : url_(detail::require_env("CLEANER_API_URL")),
          key_(std::getenv("CLEANER_API_KEY") ? std::getenv("CLEANER_API_KEY") : ""),
          model_(std::move(model)) {}

    std::string complete(const std::string& prompt) override {
        nlohmann::json body{
            {"model", model_},
            {"messages", {{{"role", "user"}, {"content", prompt}}}}};
        auto resp = nlohmann::json::parse(detail::post_json(url_, body, key_));
        return resp.at("choices").at(0).at("message").at("content").get<std::string>();
    }

  private:
    std::string url_, key_, model_;
};

// Translator over the JSON protocol
//   {"src_lang","tgt_lang","texts":[...]} -> {"translations":[...]}
// Endpoint from TRANSLATOR_API_URL.
class HttpTranslatorBackend final : public TranslatorBackend {
  public:
    HttpTranslatorBackend() : url_(detail::require_env("TRANSLATOR_API_URL")) {}

    std::vector<std::string> translate(const std::vector<std::string>& texts,
                                       const LanguageTag& src,
                                       const LanguageTag& tgt) override {
        nlohmann::json body{
            {"src_lang", src.code}, {"tgt_lang", tgt.code}, {"texts", texts}};
        auto resp = nlohmann::json::parse(detail::post_json(url_, body));
        auto out = resp.at("translations").get<std::vector<std::string>>();
        if (out.size() != texts.size())
            throw std::runtime_error("translator returned " + std::to_string(out.size()) +
                                     " translations for " + std::to_string(texts.size()) +
                                     " inputs");
        return out;
    }

  private:
    std::string url_;
};

}  // namespace bitext
