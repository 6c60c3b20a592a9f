#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace binfwd::fme {

// Built-in rate systems shipped with the tool: the relay-channel block-Markov
// system ("eq17"), the one-state cribbing MAC system ("eq21") and the
// two-state superbin system ("eq41"). Slack terms are set to zero.
std::vector<std::string> preset_names();
std::string_view preset_text(std::string_view name);  // throws on unknown name

}  // namespace binfwd::fme
