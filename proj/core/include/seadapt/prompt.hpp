// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace seadapt {

// A prompt template with optional `{class}` and `{domain}` slots, e.g.
// "A photo of a {class} in {domain}".
struct PromptSpec {
  std::string template_text;
  std::string class_name;
  std::string domain_name;
};

// Substitutes the slots that appear in the template. A slot present in the
// template with an empty substitution value is an error, as is any
// unrecognized `{...}` slot. Templates without a given slot simply do not
// use that value, so "A photo of a {class}" works with an empty
// domain_name. Pure function.
std::string render_prompt(const PromptSpec& spec);

}  // namespace seadapt
