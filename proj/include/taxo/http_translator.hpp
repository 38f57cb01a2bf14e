//
// Copyright 2026 The Taxo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Translation over HTTP using the Google Cloud Translation v2 wire format:
//   POST <endpoint>?key=<key>  {"q": ..., "source": ..., "target": ..., "format": "text"}
//   -> {"data": {"translations": [{"translatedText": ...}]}}

#ifndef TAXO_HTTP_TRANSLATOR_HPP_
#define TAXO_HTTP_TRANSLATOR_HPP_

#include <cstdlib>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "taxo/common.hpp"
#include "taxo/translation.hpp"

namespace taxo {

inline constexpr std::string_view kDefaultTranslateEndpoint =
    "https://translation.googleapis.com/language/translate/v2";
inline constexpr std::string_view kTranslateKeyVariable = "TAXO_TRANSLATE_API_KEY";

// Returns the credential from the environment or throws ProviderError.
inline std::string translation_api_key(std::string_view variable = kTranslateKeyVariable) {
  const char* key = std::getenv(std::string(variable).c_str());
  if (key == nullptr || *key == '\0') {
    throw ProviderError("translation credentials missing: set " + std::string(variable));
  }
  return key;
}

class HttpTranslator : public TranslationProvider {
 public:
  HttpTranslator(std::string endpoint, std::string api_key, int timeout_seconds = 30)
      : api_key_(std::move(api_key)), timeout_seconds_(timeout_seconds) {
    // endpoint = scheme://host[:port]/path
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("bad translator endpoint " + endpoint);
    auto path_start = endpoint.find('/', scheme_end + 3);
    base_ = endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (endpoint.rfind("https://", 0) == 0) {
      throw ConfigError("HTTPS translator endpoint requires a build with OpenSSL");
    }
#endif
  }

  std::string translate(const std::string& text, Language source, Language target) override {
    httplib::Client client(base_);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    nlohmann::json body = {{"q", text},
                           {"source", std::string(to_string(source))},
                           {"target", std::string(to_string(target))},
                           {"format", "text"}};
    std::string path = path_ + (path_.find('?') == std::string::npos ? "?" : "&") + "key=" +
                       httplib::detail::encode_query_param(api_key_);
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
      throw ProviderError("translation request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw ProviderError("translation service returned HTTP " + std::to_string(res->status));
    }
    try {
      nlohmann::json j = nlohmann::json::parse(res->body);
      return j.at("data").at("translations").at(0).at("translatedText").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError(std::string("malformed translation response: ") + e.what());
    }
  }

 private:
  std::string base_;
  std::string path_;
  std::string api_key_;
  int timeout_seconds_;
};

}  // namespace taxo

#endif  // TAXO_HTTP_TRANSLATOR_HPP_
