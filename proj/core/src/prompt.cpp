// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/prompt.hpp"

#include "seadapt/common.hpp"

namespace seadapt {

std::string render_prompt(const PromptSpec& spec) {
  std::string out;
  out.reserve(spec.template_text.size() + spec.class_name.size() +
              spec.domain_name.size());

  const std::string& t = spec.template_text;
  std::size_t i = 0;
  while (i < t.size()) {
    if (t[i] != '{') {
      out.push_back(t[i++]);
      continue;
    }
    const std::size_t close = t.find('}', i);
    require(close != std::string::npos, "prompt template '", t,
            "': unterminated slot");
    const std::string slot = t.substr(i + 1, close - i - 1);
    if (slot == "class") {
      require(!spec.class_name.empty(), "prompt template '", t,
              "': {class} slot with empty class name");
      out += spec.class_name;
    } else if (slot == "domain") {
      require(!spec.domain_name.empty(), "prompt template '", t,
              "': {domain} slot with empty domain name");
      out += spec.domain_name;
    } else {
      fail("prompt template '", t, "': unknown slot {", slot, "}");
    }
    i = close + 1;
  }
  return out;
}

}  // namespace seadapt
