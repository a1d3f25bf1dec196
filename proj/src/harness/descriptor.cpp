#include "othello/descriptor.hpp"

#include <charconv>
#include <string>
#include <vector>

#include "othello/search.hpp"

namespace othello {

namespace {

[[noreturn]] void bad(std::string_view d, const std::string& why) {
  throw Error(ErrorCode::InvalidArgument, "policy descriptor '" + std::string(d) + "': " + why);
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = text.find(sep, start);
    out.emplace_back(text.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) return out;
    start = at + 1;
  }
}

search::EvalFn parse_eval(std::string_view d, std::string_view name) {
  if (name == "wpc") return search::default_wpc();
  if (name == "discdiff") return search::DiscDiff{};
  if (name == "mobility") return search::MobilityMix{};
  if (name.starts_with("wpc@") && name.size() > 4) return search::load_wpc(std::string(name.substr(4)));
  bad(d, "unknown evaluation '" + std::string(name) + "'");
}

policy::PolicyPtr parse_search(std::string_view d, std::string_view body) {
  const std::size_t colon = body.rfind(':');
  if (colon == std::string_view::npos) bad(d, "expected search:<eval>:<depth>");
  const std::string_view depth_text = body.substr(colon + 1);
  int depth = 0;
  const auto [end, ec] = std::from_chars(depth_text.data(), depth_text.data() + depth_text.size(), depth);
  if (ec != std::errc() || end != depth_text.data() + depth_text.size()) bad(d, "bad depth");
  return std::make_shared<search::SearchPolicy>(
      search::SearchConfig{depth, parse_eval(d, body.substr(0, colon)), search::Ordering::EvalOrdered},
      std::string(d));
}

}  // namespace

policy::PolicyPtr parse_policy(std::string_view d) {
  const std::size_t colon = d.find(':');
  if (colon == std::string_view::npos || colon + 1 == d.size()) bad(d, "expected <kind>:<arguments>");
  const std::string_view kind = d.substr(0, colon);
  const std::string_view body = d.substr(colon + 1);
  const std::string label(d);
  if (kind == "net") {
    return std::make_shared<policy::PredictorPolicy>(
        std::make_shared<const nn::Model>(nn::load_model(std::string(body))), label);
  }
  if (kind == "bag") {
    std::vector<policy::PredictorPolicy> members;
    for (const std::string& path : split(body, ',')) {
      if (path.empty()) bad(d, "empty member path");
      members.emplace_back(std::make_shared<const nn::Model>(nn::load_model(path)), path);
    }
    return std::make_shared<policy::BaggedPolicy>(std::move(members), label);
  }
  if (kind == "search") return parse_search(d, body);
  if (kind == "hybrid") {
    const auto parts = split(body, ';');
    if (parts.size() != policy::kDefaultStages.size()) bad(d, "a hybrid needs exactly four stage descriptors");
    std::array<policy::PolicyPtr, 4> stages;
    for (std::size_t i = 0; i < 4; ++i) {
      if (parts[i].starts_with("hybrid:")) bad(d, "nested hybrids are not supported");
      stages[i] = parse_policy(parts[i]);
    }
    return std::make_shared<policy::HybridPolicy>(policy::make_hybrid(stages, label));
  }
  bad(d, "unknown kind '" + std::string(kind) + "'");
}

}  // namespace othello
