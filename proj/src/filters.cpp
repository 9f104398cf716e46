#include "corpusprep/filters.hpp"

namespace corpusprep {

FilterVerdict filter_language(const Document& doc, const LanguageSet& allowlist) {
    LanguageTag tag = assign_language(doc.path);
    if (tag.is_unknown() || allowlist.find(tag) == allowlist.end()) {
        return FilterVerdict::drop(reason::kLangNotAllowed);
    }
    return FilterVerdict::pass();
}

FilterVerdict filter_license(const Document& doc,
                             const std::set<std::string>& permissive) {
    if (!doc.license.has_value()) {
        return FilterVerdict::drop(reason::kLicenseMissing);
    }
    if (permissive.find(*doc.license) == permissive.end()) {
        return FilterVerdict::drop(reason::kLicenseNotPermissive);
    }
    return FilterVerdict::pass();
}

}  // namespace corpusprep
