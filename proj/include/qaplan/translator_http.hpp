#pragma once

// HTTP transport for the LLM backend. Split from translator.hpp so tests
// and tools that never touch the network don't pull in cpp-httplib.

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "qaplan/errors.hpp"
#include "qaplan/translator.hpp"

namespace qaplan::translator {

namespace detail {

// splits "http://host:port/base" into (scheme://host:port, /base)
inline std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = endpoint.find('/', host_start);
    if (path_start == std::string::npos) return {endpoint, ""};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace detail

inline std::string llm_chat(const std::string& prompt, const TranslatorConfig& config) {
    auto [host, base_path] = detail::split_endpoint(config.endpoint);

    nlohmann::json body = {
        {"model", config.model},
        {"messages",
         {{{"role", "system"},
           {"content", "You translate user queries into ASP facts. Reply with the "
                       "facts only."}},
          {{"role", "user"}, {"content", prompt}}}},
        {"temperature", config.temperature},
    };

    httplib::Client client(host);
    client.set_connection_timeout(std::chrono::duration<double>(config.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(config.timeout_s));

    httplib::Headers headers;
    if (const char* key = std::getenv("QAPLAN_LLM_API_KEY"))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(base_path + "/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res)
        throw TransportError("endpoint unreachable: " + config.endpoint + " (" +
                             httplib::to_string(res.error()) + ")");
    if (res->status < 200 || res->status >= 300) {
        std::string excerpt = res->body.substr(0, 200);
        throw TransportError("chat completion failed with status " +
                             std::to_string(res->status) + ": " + excerpt);
    }
    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed chat completion response: ") +
                             e.what());
    }
}

}  // namespace qaplan::translator
