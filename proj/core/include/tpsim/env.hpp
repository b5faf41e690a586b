// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tpsim/errors.hpp"
#include "tpsim/types.hpp"

namespace tpsim {

// Deterministic model of one shared desktop: processes, message queues, the
// raw input queue with its low-level hook chain, and the two drawing
// surfaces whose hardware composition the user sees. Every process attached
// to the desktop runs at the same privilege.

enum class InputOrigin { Hardware, SendInput, MessageForge };
enum class InputSource { Hardware, SendInput };
enum class EventLane { Raw, Message };
enum class HookBehavior { Observe, Strip, Consume };
enum class HookMode { Install, Renew };
enum class ReadVariant { MessageQueue, AsyncState, DirectInput };
enum class CaptureMethod { GrabPrimary, InjectedDll };
enum class SurfaceKind { Primary, Overlay };
enum class MemoryClass { System, Video };

const char* variant_name(ReadVariant v);

// Ground-truth record of one input event. The origin field is the hidden
// truth used by the harness and the tests; no observation API returns it.
struct InputEvent {
    std::uint64_t id = 0;
    KeyToken key;
    Tick tick = 0;
    InputOrigin origin = InputOrigin::Hardware;
    bool injected_flag = false;
    std::optional<ProcessId> sender;
    EventLane lane = EventLane::Raw;
};

// What a reader gets back from read_input. `injected` is populated only for
// the DirectInput variant; message-queue entries carry no provenance at all.
struct ObservedInput {
    std::uint64_t id = 0;
    KeyToken key;
    Tick tick = 0;
    std::optional<bool> injected;
};

// Entry an observe hook copied into its owner's capture log, with the flag
// value as it stood at the hook's position in the chain.
struct HookCapture {
    std::uint64_t event_id = 0;
    KeyToken key;
    bool injected = false;
    Tick tick = 0;
};

struct Hook {
    ProcessId owner;
    HookBehavior behavior = HookBehavior::Observe;
    Tick installed_at = 0;
    // Monotonic install stamp; breaks ties when two hooks are (re)installed
    // within the same tick. The chain is ordered by stamp, newest first.
    std::uint64_t stamp = 0;
};

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};

class Surface {
public:
    Surface(SurfaceKind kind, MemoryClass memory, int width, int height, PixelToken background);

    SurfaceKind kind() const { return kind_; }
    MemoryClass memory_class() const { return memory_; }
    int width() const { return width_; }
    int height() const { return height_; }

    const PixelToken& at(int x, int y) const;
    void set(int x, int y, const PixelToken& token);
    void fill(const Rect& region, const PixelToken& token);
    void blit(const Rect& region, std::span<const PixelToken> tokens);

    const std::vector<PixelToken>& pixels() const { return pixels_; }

private:
    void check_rect(const Rect& region) const;

    SurfaceKind kind_;
    MemoryClass memory_;
    int width_;
    int height_;
    std::vector<PixelToken> pixels_;
};

// A captured or composed screen image.
struct PixelGrid {
    int width = 0;
    int height = 0;
    std::vector<PixelToken> pixels;

    const PixelToken& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool operator==(const PixelGrid&) const = default;
};

// What the human standing in front of the monitor sees.
using UserView = PixelGrid;

struct DesktopCapabilities {
    bool hooks_enabled = true;
    bool code_injection_enabled = false;
    bool directx_developer_mode = false;
};

struct EnvCounters {
    std::uint64_t flag_strips = 0;          // strip hooks that flipped a true flag
    std::uint64_t events_consumed = 0;      // consume hooks that dropped an event
    std::uint64_t injections_blocked = 0;   // InjectedDll captures refused
};

class Desktop {
public:
    static constexpr int kScreenWidth = 8;
    static constexpr int kScreenHeight = 4;
    static inline const PixelToken kColorKey = "KEY";
    static inline const PixelToken kBackground = "BG";

    explicit Desktop(DesktopCapabilities caps, int width = kScreenWidth,
                     int height = kScreenHeight);

    const DesktopCapabilities& capabilities() const { return caps_; }
    int width() const { return primary_.width(); }
    int height() const { return primary_.height(); }

    // -- processes ---------------------------------------------------------

    ProcessId spawn_process(ProcessRole role);
    bool attached(ProcessId pid) const;
    ProcessRole role_of(ProcessId pid) const;
    std::vector<ProcessId> processes() const;

    // -- input -------------------------------------------------------------

    // Appends a forged event to the target's message queue. The raw input
    // queue never sees these.
    void post_window_message(ProcessId sender, ProcessId target, const KeyToken& key);

    // Appends an event to the raw input queue. A matching message-queue
    // entry is delivered to the focused process, mirroring how raw input is
    // distilled into messages.
    void inject_input(InputSource source, const KeyToken& key,
                      std::optional<ProcessId> sender = std::nullopt);

    void install_hook(ProcessId owner, HookBehavior behavior, HookMode mode);
    std::optional<Hook> hook_of(ProcessId owner) const;
    const std::vector<Hook>& hook_chain() const { return hook_chain_; }

    // Runs every pending raw event through the hook chain, newest hook
    // first. Survivors become visible to AsyncState and DirectInput readers.
    void dispatch_raw_queue();

    std::vector<ObservedInput> read_input(ProcessId reader, ReadVariant variant);

    // Moves the reader's AsyncState/DirectInput cursor past everything
    // already dispatched, discarding stale input.
    void snap_input_cursor(ProcessId reader, ReadVariant variant);

    const std::vector<HookCapture>& capture_log(ProcessId owner) const;

    std::size_t message_queue_depth(ProcessId pid) const;
    std::size_t raw_queue_depth() const { return pending_raw_.size(); }

    // -- output ------------------------------------------------------------

    Surface& primary() { return primary_; }
    const Surface& primary() const { return primary_; }
    const Surface* overlay() const { return overlay_ ? &*overlay_ : nullptr; }
    std::optional<ProcessId> fullscreen_owner() const { return fullscreen_owner_; }

    // First come, first served; creates the video-memory overlay surface.
    Surface& acquire_fullscreen_exclusive(ProcessId requester);
    void release_fullscreen(ProcessId owner);

    void draw(ProcessId drawer, SurfaceKind target, const Rect& region,
              std::span<const PixelToken> tokens);
    void draw_fill(ProcessId drawer, SurfaceKind target, const Rect& region,
                   const PixelToken& token);

    PixelGrid capture(ProcessId capturer, CaptureMethod method);

    // Per-pixel hardware composition: overlay content shows through wherever
    // the primary holds the color key.
    UserView compose_user_view() const;

    const PixelToken& color_key() const { return kColorKey; }

    // -- clock -------------------------------------------------------------

    Tick now() const { return clock_; }
    void advance_tick() { ++clock_; }

    // -- hidden ground truth (harness and tests only; actors must not call) -

    const std::vector<InputEvent>& ground_truth_events() const { return all_events_; }
    std::optional<InputOrigin> origin_of(std::uint64_t event_id) const;
    const EnvCounters& counters() const { return counters_; }
    std::uint64_t forged_posted_to(ProcessId target) const;

private:
    struct DispatchedEvent {
        InputEvent event; // flag here is the post-chain value
    };

    ProcessId focused_process() const;
    void record_event(const InputEvent& ev);

    DesktopCapabilities caps_;
    Tick clock_ = 0;
    std::uint32_t next_pid_ = 1;
    std::uint64_t next_event_id_ = 1;
    std::uint64_t next_hook_stamp_ = 1;

    std::map<ProcessId, ProcessRole> roles_;
    std::vector<ProcessId> spawn_order_;
    std::map<ProcessId, std::vector<InputEvent>> message_queues_;
    std::vector<InputEvent> pending_raw_;
    std::vector<DispatchedEvent> dispatched_;
    std::vector<Hook> hook_chain_;
    std::map<ProcessId, std::vector<HookCapture>> capture_logs_;
    std::map<ProcessId, std::size_t> direct_cursor_;
    std::map<ProcessId, std::size_t> async_cursor_;

    Surface primary_;
    std::optional<Surface> overlay_;
    std::optional<ProcessId> fullscreen_owner_;

    std::vector<InputEvent> all_events_;
    EnvCounters counters_;
    std::map<ProcessId, std::uint64_t> forged_posted_;
};

} // namespace tpsim
