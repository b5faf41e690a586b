// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/env.hpp"

#include <algorithm>
#include <stdexcept>

namespace tpsim {

const char* role_name(ProcessRole role) {
    switch (role) {
    case ProcessRole::Control: return "control";
    case ProcessRole::Benign: return "benign";
    case ProcessRole::Adversary: return "adversary";
    case ProcessRole::UserAgent: return "user-agent";
    }
    return "?";
}

const char* variant_name(ReadVariant v) {
    switch (v) {
    case ReadVariant::MessageQueue: return "message_queue";
    case ReadVariant::AsyncState: return "async_state";
    case ReadVariant::DirectInput: return "direct_input";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Surface

Surface::Surface(SurfaceKind kind, MemoryClass memory, int width, int height,
                 PixelToken background)
    : kind_(kind), memory_(memory), width_(width), height_(height),
      pixels_(static_cast<std::size_t>(width) * height, std::move(background)) {}

const PixelToken& Surface::at(int x, int y) const {
    return pixels_.at(static_cast<std::size_t>(y) * width_ + x);
}

void Surface::set(int x, int y, const PixelToken& token) {
    pixels_.at(static_cast<std::size_t>(y) * width_ + x) = token;
}

void Surface::check_rect(const Rect& region) const {
    if (region.x < 0 || region.y < 0 || region.w < 0 || region.h < 0 ||
        region.x + region.w > width_ || region.y + region.h > height_) {
        throw std::out_of_range("draw region outside surface bounds");
    }
}

void Surface::fill(const Rect& region, const PixelToken& token) {
    check_rect(region);
    for (int y = region.y; y < region.y + region.h; ++y) {
        for (int x = region.x; x < region.x + region.w; ++x) {
            set(x, y, token);
        }
    }
}

void Surface::blit(const Rect& region, std::span<const PixelToken> tokens) {
    check_rect(region);
    if (tokens.size() != static_cast<std::size_t>(region.w) * region.h) {
        throw std::invalid_argument("blit token count does not match region");
    }
    std::size_t i = 0;
    for (int y = region.y; y < region.y + region.h; ++y) {
        for (int x = region.x; x < region.x + region.w; ++x) {
            set(x, y, tokens[i++]);
        }
    }
}

// ---------------------------------------------------------------------------
// Desktop

Desktop::Desktop(DesktopCapabilities caps, int width, int height)
    : caps_(caps),
      primary_(SurfaceKind::Primary, MemoryClass::System, width, height, kBackground) {
    if (caps_.code_injection_enabled && !caps_.hooks_enabled) {
        // Injection is modeled as a hooking capability.
        throw Error(Err::ConstraintError, "code injection requires hooks to be enabled");
    }
}

ProcessId Desktop::spawn_process(ProcessRole role) {
    const ProcessId pid{next_pid_++};
    roles_.emplace(pid, role);
    spawn_order_.push_back(pid);
    message_queues_.emplace(pid, std::vector<InputEvent>{});
    return pid;
}

bool Desktop::attached(ProcessId pid) const { return roles_.count(pid) != 0; }

ProcessRole Desktop::role_of(ProcessId pid) const {
    auto it = roles_.find(pid);
    if (it == roles_.end()) {
        throw Error(Err::UnknownProcess, "pid " + std::to_string(pid.value));
    }
    return it->second;
}

std::vector<ProcessId> Desktop::processes() const { return spawn_order_; }

ProcessId Desktop::focused_process() const {
    if (fullscreen_owner_) {
        return *fullscreen_owner_;
    }
    // Most recently spawned control-role process; spawn order breaks ties.
    for (auto it = spawn_order_.rbegin(); it != spawn_order_.rend(); ++it) {
        if (roles_.at(*it) == ProcessRole::Control) {
            return *it;
        }
    }
    return ProcessId{0}; // no focus; distilled messages are dropped
}

void Desktop::record_event(const InputEvent& ev) { all_events_.push_back(ev); }

void Desktop::post_window_message(ProcessId sender, ProcessId target, const KeyToken& key) {
    if (!attached(sender)) {
        throw Error(Err::UnknownProcess, "sender pid " + std::to_string(sender.value));
    }
    if (!attached(target)) {
        throw Error(Err::UnknownProcess, "target pid " + std::to_string(target.value));
    }
    InputEvent ev;
    ev.id = next_event_id_++;
    ev.key = key;
    ev.tick = clock_;
    ev.origin = InputOrigin::MessageForge;
    ev.injected_flag = false;
    ev.sender = sender;
    ev.lane = EventLane::Message;
    message_queues_[target].push_back(ev);
    record_event(ev);
    ++forged_posted_[target];
}

void Desktop::inject_input(InputSource source, const KeyToken& key,
                           std::optional<ProcessId> sender) {
    if (source == InputSource::SendInput) {
        if (!sender) {
            throw Error(Err::MissingSender, "send_input requires a sending process");
        }
        if (!attached(*sender)) {
            throw Error(Err::UnknownProcess, "sender pid " + std::to_string(sender->value));
        }
    }
    InputEvent ev;
    ev.id = next_event_id_++;
    ev.key = key;
    ev.tick = clock_;
    ev.origin = source == InputSource::Hardware ? InputOrigin::Hardware : InputOrigin::SendInput;
    ev.injected_flag = (source == InputSource::SendInput);
    ev.sender = source == InputSource::Hardware ? std::nullopt : sender;
    ev.lane = EventLane::Raw;
    pending_raw_.push_back(ev);
    record_event(ev);

    // Raw input is distilled into a window message for the focused process.
    const ProcessId focus = focused_process();
    if (focus.value != 0) {
        InputEvent msg = ev;
        msg.id = next_event_id_++;
        msg.lane = EventLane::Message;
        message_queues_[focus].push_back(msg);
        record_event(msg);
    }
}

void Desktop::install_hook(ProcessId owner, HookBehavior behavior, HookMode mode) {
    if (!caps_.hooks_enabled) {
        throw Error(Err::HooksDisabled, "hooks are disabled for this desktop session");
    }
    if (!attached(owner)) {
        throw Error(Err::UnknownProcess, "owner pid " + std::to_string(owner.value));
    }
    auto existing = std::find_if(hook_chain_.begin(), hook_chain_.end(),
                                 [&](const Hook& h) { return h.owner == owner; });
    if (mode == HookMode::Renew) {
        if (existing == hook_chain_.end()) {
            throw Error(Err::NoExistingHook, "renew without a prior hook");
        }
        behavior = existing->behavior;
    }
    if (existing != hook_chain_.end()) {
        hook_chain_.erase(existing);
    }
    Hook hook;
    hook.owner = owner;
    hook.behavior = behavior;
    hook.installed_at = clock_;
    hook.stamp = next_hook_stamp_++;
    hook_chain_.insert(hook_chain_.begin(), hook);
}

std::optional<Hook> Desktop::hook_of(ProcessId owner) const {
    for (const Hook& h : hook_chain_) {
        if (h.owner == owner) {
            return h;
        }
    }
    return std::nullopt;
}

void Desktop::dispatch_raw_queue() {
    for (InputEvent ev : pending_raw_) {
        bool consumed = false;
        for (const Hook& hook : hook_chain_) {
            switch (hook.behavior) {
            case HookBehavior::Observe:
                capture_logs_[hook.owner].push_back(
                    HookCapture{ev.id, ev.key, ev.injected_flag, ev.tick});
                break;
            case HookBehavior::Strip:
                if (ev.injected_flag) {
                    ev.injected_flag = false;
                    ++counters_.flag_strips;
                }
                break;
            case HookBehavior::Consume:
                consumed = true;
                break;
            }
            if (consumed) {
                ++counters_.events_consumed;
                break;
            }
        }
        if (!consumed) {
            dispatched_.push_back(DispatchedEvent{ev});
        }
    }
    pending_raw_.clear();
}

std::vector<ObservedInput> Desktop::read_input(ProcessId reader, ReadVariant variant) {
    if (!attached(reader)) {
        throw Error(Err::UnknownProcess, "reader pid " + std::to_string(reader.value));
    }
    std::vector<ObservedInput> out;
    switch (variant) {
    case ReadVariant::MessageQueue: {
        auto& queue = message_queues_[reader];
        out.reserve(queue.size());
        for (const InputEvent& ev : queue) {
            out.push_back(ObservedInput{ev.id, ev.key, ev.tick, std::nullopt});
        }
        queue.clear();
        break;
    }
    case ReadVariant::AsyncState: {
        // Keys pressed since the last poll, derived from raw-queue events
        // only. Repeated presses of a key within one poll interval collapse
        // into a single report, like a pressed-since-last-poll bit.
        std::size_t& cursor = async_cursor_[reader];
        std::vector<KeyToken> seen;
        for (std::size_t i = cursor; i < dispatched_.size(); ++i) {
            const InputEvent& ev = dispatched_[i].event;
            if (std::find(seen.begin(), seen.end(), ev.key) != seen.end()) {
                continue;
            }
            seen.push_back(ev.key);
            out.push_back(ObservedInput{ev.id, ev.key, ev.tick, std::nullopt});
        }
        cursor = dispatched_.size();
        break;
    }
    case ReadVariant::DirectInput: {
        std::size_t& cursor = direct_cursor_[reader];
        for (std::size_t i = cursor; i < dispatched_.size(); ++i) {
            const InputEvent& ev = dispatched_[i].event;
            out.push_back(ObservedInput{ev.id, ev.key, ev.tick, ev.injected_flag});
        }
        cursor = dispatched_.size();
        break;
    }
    }
    return out;
}

void Desktop::snap_input_cursor(ProcessId reader, ReadVariant variant) {
    switch (variant) {
    case ReadVariant::MessageQueue:
        message_queues_[reader].clear();
        break;
    case ReadVariant::AsyncState:
        async_cursor_[reader] = dispatched_.size();
        break;
    case ReadVariant::DirectInput:
        direct_cursor_[reader] = dispatched_.size();
        break;
    }
}

const std::vector<HookCapture>& Desktop::capture_log(ProcessId owner) const {
    static const std::vector<HookCapture> kEmpty;
    auto it = capture_logs_.find(owner);
    return it == capture_logs_.end() ? kEmpty : it->second;
}

std::size_t Desktop::message_queue_depth(ProcessId pid) const {
    auto it = message_queues_.find(pid);
    return it == message_queues_.end() ? 0 : it->second.size();
}

Surface& Desktop::acquire_fullscreen_exclusive(ProcessId requester) {
    if (!attached(requester)) {
        throw Error(Err::UnknownProcess, "requester pid " + std::to_string(requester.value));
    }
    if (fullscreen_owner_) {
        throw Error(Err::AlreadyOwned,
                    "held by pid " + std::to_string(fullscreen_owner_->value));
    }
    fullscreen_owner_ = requester;
    overlay_.emplace(SurfaceKind::Overlay, MemoryClass::Video, primary_.width(),
                     primary_.height(), kBackground);
    return *overlay_;
}

void Desktop::release_fullscreen(ProcessId owner) {
    if (!fullscreen_owner_ || *fullscreen_owner_ != owner) {
        throw Error(Err::NotOwner, "release by non-owner");
    }
    fullscreen_owner_.reset();
    overlay_.reset();
}

void Desktop::draw(ProcessId drawer, SurfaceKind target, const Rect& region,
                   std::span<const PixelToken> tokens) {
    if (!attached(drawer)) {
        throw Error(Err::UnknownProcess, "drawer pid " + std::to_string(drawer.value));
    }
    if (target == SurfaceKind::Overlay) {
        if (!fullscreen_owner_ || *fullscreen_owner_ != drawer) {
            throw Error(Err::NotOwner, "overlay draw requires fullscreen ownership");
        }
        overlay_->blit(region, tokens);
    } else {
        // The primary surface is shared; any attached process may draw.
        primary_.blit(region, tokens);
    }
}

void Desktop::draw_fill(ProcessId drawer, SurfaceKind target, const Rect& region,
                        const PixelToken& token) {
    std::vector<PixelToken> tokens(static_cast<std::size_t>(region.w) * region.h, token);
    draw(drawer, target, region, tokens);
}

PixelGrid Desktop::capture(ProcessId capturer, CaptureMethod method) {
    if (!attached(capturer)) {
        throw Error(Err::UnknownProcess, "capturer pid " + std::to_string(capturer.value));
    }
    if (method == CaptureMethod::InjectedDll) {
        if (!caps_.code_injection_enabled) {
            ++counters_.injections_blocked;
            throw Error(Err::InjectionBlocked, "code injection disabled on this desktop");
        }
        return compose_user_view();
    }
    if (caps_.directx_developer_mode) {
        // The developer runtime exposes the composed output to readback.
        return compose_user_view();
    }
    return PixelGrid{primary_.width(), primary_.height(), primary_.pixels()};
}

UserView Desktop::compose_user_view() const {
    UserView view{primary_.width(), primary_.height(), primary_.pixels()};
    if (!overlay_) {
        return view;
    }
    for (std::size_t i = 0; i < view.pixels.size(); ++i) {
        if (view.pixels[i] == kColorKey) {
            view.pixels[i] = overlay_->pixels()[i];
        }
    }
    return view;
}

std::optional<InputOrigin> Desktop::origin_of(std::uint64_t event_id) const {
    for (const InputEvent& ev : all_events_) {
        if (ev.id == event_id) {
            return ev.origin;
        }
    }
    return std::nullopt;
}

std::uint64_t Desktop::forged_posted_to(ProcessId target) const {
    auto it = forged_posted_.find(target);
    return it == forged_posted_.end() ? 0 : it->second;
}

} // namespace tpsim
