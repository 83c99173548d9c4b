#include "kbc/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace kbc {

unsigned default_thread_count() {
    unsigned requested = 0;
    if (const char* env = std::getenv("ENTROPY_CLASSIFIER_THREADS")) {
        const char* end = env + std::strlen(env);
        unsigned parsed = 0;
        auto [ptr, ec] = std::from_chars(env, end, parsed);
        if (ec == std::errc() && ptr == end) requested = parsed;
    }
    if (requested == 0) requested = std::thread::hardware_concurrency();
    return requested == 0 ? 1 : requested;
}

}  // namespace kbc
