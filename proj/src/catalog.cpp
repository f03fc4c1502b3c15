#include "mloc/catalog.hpp"

#include <cstdlib>

namespace mloc {

namespace {
const std::string kOtherName = "Other";
}

AnatomicalCatalog::AnatomicalCatalog(std::vector<CatalogEntry> entries)
    : entries_(std::move(entries)) {
    int prev = 0;
    for (const auto& e : entries_) {
        if (e.index <= prev) {
            throw Error("catalog: indices must be strictly increasing and positive");
        }
        prev = e.index;
    }
}

AnatomicalCatalog AnatomicalCatalog::standard() {
    return AnatomicalCatalog({{1, "Esophagus"},
                              {2, "Cardia"},
                              {3, "Angularis"},
                              {4, "Pylorus"},
                              {5, "Duodenum"},
                              {6, "Jejunum"},
                              {7, "Ileum"},
                              {8, "Colon"},
                              {9, "Rectum"},
                              {10, "Anus"}});
}

bool AnatomicalCatalog::contains(int index) const {
    for (const auto& e : entries_)
        if (e.index == index) return true;
    return false;
}

const std::string& AnatomicalCatalog::name_of(int index) const {
    if (index == kOtherLabel) return kOtherName;
    for (const auto& e : entries_)
        if (e.index == index) return e.name;
    throw Error("catalog: unknown label index " + std::to_string(index));
}

int AnatomicalCatalog::index_of(const std::string& name) const {
    if (name == kOtherName) return kOtherLabel;
    for (const auto& e : entries_)
        if (e.name == name) return e.index;
    char* end = nullptr;
    const long v = std::strtol(name.c_str(), &end, 10);
    if (end && *end == '\0' && !name.empty() && (v == 0 || contains(static_cast<int>(v)))) {
        return static_cast<int>(v);
    }
    throw Error("catalog: unknown label \"" + name + "\"");
}

}  // namespace mloc
