#include "cpl/llm/provider.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace cpl {

HttpChatProvider::HttpChatProvider(HttpProviderSettings settings) : settings_(std::move(settings)) {
  const auto& url = settings_.endpoint;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  base_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

std::string HttpChatProvider::request_body(const ChatRequest& request) const {
  auto model = settings_.models.find(request.role);
  if (model == settings_.models.end()) {
    throw ConfigError("no model configured for role " + to_string(request.role));
  }
  nlohmann::json body{
      {"model", model->second},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", request.system_prompt}},
                              {{"role", "user"}, {"content", request.user_content}}})},
      {"temperature", request.sampling.temperature}};
  if (request.sampling.max_output > 0) body["max_completion_tokens"] = request.sampling.max_output;
  return body.dump();
}

std::string HttpChatProvider::complete(const ChatRequest& request) {
  httplib::Client client(base_);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(settings_.timeout);
  client.set_write_timeout(std::chrono::seconds(60));
  httplib::Headers headers;
  if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);

  auto res = client.Post(path_, headers, request_body(request), "application/json");
  if (!res) throw TransportError("HTTP request failed: " + httplib::to_string(res.error()));
  int status = res->status;
  if (status == 401 || status == 403) {
    throw FatalError("chat endpoint rejected the credentials (HTTP " + std::to_string(status) +
                     "); check the API key environment variable");
  }
  if (status == 408 || status == 429 || status >= 500) {
    throw TransportError("chat endpoint returned HTTP " + std::to_string(status));
  }
  if (status != 200) {
    throw FatalError("chat endpoint returned HTTP " + std::to_string(status) + ": " + res->body.substr(0, 500));
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed chat response: ") + e.what());
  }
}

}  // namespace cpl
