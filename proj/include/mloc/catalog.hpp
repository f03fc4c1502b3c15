#pragma once

#include <string>
#include <vector>

#include "mloc/error.hpp"

namespace mloc {

// Label convention: 0 is the open-set sink "Other"; positive indices are
// catalog entries in fixed anatomical order.
constexpr int kOtherLabel = 0;

struct CatalogEntry {
    int index;  // strictly increasing, unique, >= 1
    std::string name;
};

class AnatomicalCatalog {
public:
    explicit AnatomicalCatalog(std::vector<CatalogEntry> entries);

    // Esophagus(1) .. Anus(10).
    static AnatomicalCatalog standard();

    const std::vector<CatalogEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    bool contains(int index) const;
    const std::string& name_of(int index) const;          // "Other" for 0
    int index_of(const std::string& name) const;          // accepts name or decimal index

private:
    std::vector<CatalogEntry> entries_;
};

}  // namespace mloc
