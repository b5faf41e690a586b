// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include <benchmark/benchmark.h>

#include "tpsim/channel.hpp"
#include "tpsim/env.hpp"
#include "tpsim/rng.hpp"
#include "tpsim/scenario.hpp"
#include "tpsim/simulation.hpp"

namespace {

void BM_FrameCodecRoundTrip(benchmark::State& state) {
    tpsim::Rng rng(1);
    std::string payload;
    for (int i = 0; i < 64; ++i) {
        payload.push_back(static_cast<char>(rng.below(256)));
    }
    for (auto _ : state) {
        const auto bytes = tpsim::encode_frame(tpsim::FrameType::Stage, payload);
        benchmark::DoNotOptimize(tpsim::decode_frame(bytes));
    }
}
BENCHMARK(BM_FrameCodecRoundTrip);

void BM_ComposeUserView(benchmark::State& state) {
    tpsim::Desktop d(tpsim::DesktopCapabilities{});
    const tpsim::ProcessId owner = d.spawn_process(tpsim::ProcessRole::Control);
    d.acquire_fullscreen_exclusive(owner);
    d.draw_fill(owner, tpsim::SurfaceKind::Primary, tpsim::Rect{0, 0, d.width(), d.height()},
                d.color_key());
    d.draw_fill(owner, tpsim::SurfaceKind::Overlay, tpsim::Rect{0, 0, d.width(), d.height()},
                "HOLO");
    for (auto _ : state) {
        benchmark::DoNotOptimize(d.compose_user_view());
    }
}
BENCHMARK(BM_ComposeUserView);

void BM_BaselineScenario(benchmark::State& state) {
    const tpsim::ScenarioConfig config = tpsim::load_scenario("attack=none\nduration=300\n");
    for (auto _ : state) {
        benchmark::DoNotOptimize(tpsim::run_scenario(config));
    }
}
BENCHMARK(BM_BaselineScenario);

void BM_StripperRaceScenario(benchmark::State& state) {
    const tpsim::ScenarioConfig config = tpsim::load_scenario(
        "attack=sendinput_injector,flag_stripper\nuser_cadence=8\nduration=400\n");
    for (auto _ : state) {
        benchmark::DoNotOptimize(tpsim::run_scenario(config));
    }
}
BENCHMARK(BM_StripperRaceScenario);

} // namespace

BENCHMARK_MAIN();
