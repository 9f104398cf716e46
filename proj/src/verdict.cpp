#include "corpusprep/verdict.hpp"

namespace corpusprep::reason {

const std::vector<std::string_view>& all_codes() {
    static const std::vector<std::string_view> codes = {
        kLangNotAllowed, kLicenseMissing, kLicenseNotPermissive,
        kLowAlpha,       kXmlHeader,      kHtmlLowVisible,
        kStructuredSize, kNonEnglish,     kLowEngagement,
        kExactDup,       kFuzzyDup,       kHapExceeded,
        kMalware,
    };
    return codes;
}

}  // namespace corpusprep::reason
