#pragma once

#include <set>
#include <string>

#include "corpusprep/document.hpp"
#include "corpusprep/language.hpp"
#include "corpusprep/verdict.hpp"

namespace corpusprep {

// Keep iff the language assigned from doc.path is in the allowlist.
FilterVerdict filter_language(const Document& doc, const LanguageSet& allowlist);

// Keep iff doc.license is present and permissive.
FilterVerdict filter_license(const Document& doc,
                             const std::set<std::string>& permissive);

}  // namespace corpusprep
