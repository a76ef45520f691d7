#include "corrlda/stopwords.hpp"

#include <fstream>
#include <sstream>

#include "corrlda/errors.hpp"

namespace corrlda {

// Newline-separated list generated from data/stopwords.txt at configure time.
extern const char* const kBuiltinStopwords;

const StopwordSet& StopwordSet::builtin() {
    static const StopwordSet set = [] {
        StopwordSet s;
        std::istringstream in(kBuiltinStopwords);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) s.insert(line);
        }
        return s;
    }();
    return set;
}

StopwordSet StopwordSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open stopword file: " + path.string());
    }
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) set.insert(line);
    }
    return set;
}

} // namespace corrlda
