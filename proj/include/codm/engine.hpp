#pragma once

#include "codm/database.hpp"

#include <memory>
#include <mutex>
#include <shared_mutex>
#include <type_traits>
#include <utility>

namespace codm {

/// Single writer, many readers. Readers hold an immutable snapshot; a writer
/// mutates a private copy that replaces the snapshot only when it succeeds.
class Engine {
public:
    Engine() : current_(std::make_shared<const Database>()) {}
    explicit Engine(Database db) : current_(std::make_shared<const Database>(std::move(db))) {}

    std::shared_ptr<const Database> snapshot() const {
        std::shared_lock lock(swap_);
        return current_;
    }

    template <class F>
    auto write(F&& f) {
        std::lock_guard writer(writer_);
        auto next = std::make_shared<Database>(*snapshot());
        if constexpr (std::is_void_v<std::invoke_result_t<F, Database&>>) {
            std::forward<F>(f)(*next);
            publish(std::move(next));
        } else {
            auto result = std::forward<F>(f)(*next);
            publish(std::move(next));
            return result;
        }
    }

    void replace(Database db) {
        std::lock_guard writer(writer_);
        publish(std::make_shared<Database>(std::move(db)));
    }

private:
    void publish(std::shared_ptr<Database> next) {
        std::unique_lock lock(swap_);
        current_ = std::move(next);
    }

    mutable std::shared_mutex swap_;
    std::mutex writer_;
    std::shared_ptr<const Database> current_;
};

} // namespace codm
