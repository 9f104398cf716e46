#pragma once

namespace corpusprep::embedded {

// Contents of the data/ files, embedded at build time so the binary is
// self-contained and relocatable.
extern const char* const kLanguagesTxt;
extern const char* const kExtensionMapTsv;
extern const char* const kStopwordsTxt;

}  // namespace corpusprep::embedded
