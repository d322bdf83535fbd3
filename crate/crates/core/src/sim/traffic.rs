//! Vehicle dynamics on a two-way corridor: intelligent-driver car following,
//! scheduled stop lines, gap-accepted lane changes, side-road merges and
//! diverges.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Direction, Regime, ScenarioConfig, StopWave};
use crate::geometry::Point2;

/// Side-road length visible approach, meters.
pub const SIDE_ROAD_LEN: f64 = 60.0;
/// Distance between the road edge and the merge wait point.
const WAIT_OFFSET: f64 = 3.0;
const SIDE_SPEED: f64 = 8.0;
const LANE_CHANGE_S: f64 = 2.5;
/// Gap between side-road entrants queueing for a merge.
const SIDE_QUEUE_GAP: f64 = 8.0;

const A_MAX: f64 = 1.5;
const B_COMF: f64 = 2.0;
const B_MAX: f64 = 9.0;
/// Deceleration a driver accepts when deciding to stop for a stop line.
const B_DECIDE: f64 = 6.0;
const S0: f64 = 2.0;
const T_HEAD: f64 = 1.2;
const MIN_GAP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Background,
    Scripted,
    OvertakeSlow,
    OvertakeFast,
    Entrant,
    Diverger,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Background => "background",
            Role::Scripted => "scripted",
            Role::OvertakeSlow => "overtake-slow",
            Role::OvertakeFast => "overtake-fast",
            Role::Entrant => "entrant",
            Role::Diverger => "diverger",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleInfo {
    pub id: u64,
    pub direction: Direction,
    pub role: Role,
    pub length: f64,
    pub desired_kmh: f64,
    pub spawn_t: f64,
}

#[derive(Debug, Clone)]
struct Spawn {
    t: f64,
    dir: Direction,
    lane: usize,
    desired: f64,
    length: f64,
    role: Role,
    partner: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    /// On the side road, `a` meters from the outer-lane centre line.
    Approach { a: f64 },
    Merging { a: f64 },
    Main,
    /// Leaving laterally at `x`, `a` meters past the outer-lane centre line.
    Exiting { x: f64, a: f64 },
}

#[derive(Debug, Clone)]
struct Vehicle {
    id: u64,
    dir: Direction,
    length: f64,
    desired: f64,
    speed: f64,
    /// Distance travelled along the corridor from the direction's entry end.
    s: f64,
    lane: usize,
    /// (from, to, progress in [0, 1]).
    lane_change: Option<(usize, usize, f64)>,
    phase: Phase,
    role: Role,
    partner: Option<u64>,
    stopping_for: Option<usize>,
}

impl Vehicle {
    fn half(&self) -> f64 {
        self.length / 2.0
    }

    fn occupies(&self, lane: usize) -> bool {
        match self.lane_change {
            Some((a, b, _)) => a == lane || b == lane,
            None => self.lane == lane,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Obstacle {
    id: u64,
    s: f64,
    half: f64,
    speed: f64,
}

/// Truth state of one vehicle at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: u64,
    pub pos: Point2,
    pub speed: f64,
    pub length: f64,
    /// Main-road lane, `None` while changing lanes or on the side road.
    pub lane: Option<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Traffic {
    length: f64,
    lanes: usize,
    lane_width: f64,
    side_x: Option<f64>,
    waves: Vec<StopWave>,
    schedule: Vec<Spawn>,
    next_spawn: usize,
    queues: BTreeMap<(Direction, usize), VecDeque<usize>>,
    spawned: Vec<Option<u64>>,
    vehicles: Vec<Vehicle>,
    next_id: u64,
    info: BTreeMap<u64, VehicleInfo>,
}

fn kmh(v: f64) -> f64 {
    v / 3.6
}

fn poisson_times(rng: &mut ChaCha8Rng, per_min: f64, until: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if per_min <= 0.0 {
        return out;
    }
    let rate = per_min / 60.0;
    let mut t = 0.0;
    loop {
        let u: f64 = rng.random::<f64>();
        t += -(1.0 - u).ln() / rate;
        if t >= until {
            return out;
        }
        out.push(t);
    }
}

impl Traffic {
    pub fn new(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Self {
        let side_x = (cfg.regime == Regime::MergeDiverge).then(|| {
            let (x0, x1) = cfg.footprint_x(1.min(cfg.camera_count - 1));
            (x0 + x1) / 2.0
        });
        let mut schedule = Vec::new();
        let [lo, hi] = cfg.speed_range;
        for dir in Direction::BOTH {
            for t in poisson_times(rng, cfg.vehicle_arrival, cfg.duration) {
                let lane = rng.random_range(0..cfg.lanes_per_direction);
                let desired = kmh(rng.random_range(lo..=hi));
                let u: f64 = rng.random::<f64>();
                let length = if u < 0.8 {
                    4.5
                } else if u < 0.93 {
                    6.5
                } else {
                    12.0
                };
                let diverge = rng.random::<f64>() < cfg.diverge_prob;
                let role = if side_x.is_some() && lane == 0 && diverge { Role::Diverger } else { Role::Background };
                schedule.push(Spawn { t, dir, lane, desired, length, role, partner: None });
            }
        }
        if side_x.is_some() {
            for dir in Direction::BOTH {
                for t in poisson_times(rng, cfg.merge_rate, cfg.duration) {
                    let desired = kmh(rng.random_range(lo..=hi));
                    schedule.push(Spawn { t, dir, lane: 0, desired, length: 4.5, role: Role::Entrant, partner: None });
                }
            }
        }
        if cfg.lanes_per_direction >= 2 && cfg.camera_count >= 2 {
            for dir in Direction::BOTH {
                for t0 in poisson_times(rng, cfg.overtaking_pairs, cfg.duration) {
                    let k = rng.random_range(0..cfg.camera_count - 1);
                    let v_s = kmh(rng.random_range(30.0..=40.0));
                    let len_s = rng.random_range(12.0..=16.0);
                    let v_f = kmh(rng.random_range(80.0..=100.0));
                    let d0 = rng.random_range(0.0..=5.0);
                    // Source-side overlap boundary in travel coordinates.
                    let x_up = cfg.footprint_x(k).1;
                    let x_down = cfg.footprint_x(k + 1).0;
                    let s_os = match dir {
                        Direction::East => x_up.min(x_down),
                        Direction::West => cfg.corridor_length - x_up.max(x_down),
                    };
                    let t_level = t0 + s_os / v_s;
                    let t_fast = t_level - (s_os - d0) / v_f;
                    let slow = schedule.len();
                    schedule.push(Spawn {
                        t: t0,
                        dir,
                        lane: 0,
                        desired: v_s,
                        length: len_s,
                        role: Role::OvertakeSlow,
                        partner: None,
                    });
                    schedule.push(Spawn {
                        t: t_fast,
                        dir,
                        lane: 1,
                        desired: v_f,
                        length: 4.5,
                        role: Role::OvertakeFast,
                        partner: Some(slow),
                    });
                }
            }
        }
        for s in &cfg.scripted {
            schedule.push(Spawn {
                t: s.spawn_t,
                dir: s.direction,
                lane: s.lane,
                desired: kmh(s.speed_kmh),
                length: s.length,
                role: Role::Scripted,
                partner: None,
            });
        }
        // Stable sort keeps generation order among equal times; partner
        // indices are remapped afterwards.
        let mut order: Vec<usize> = (0..schedule.len()).collect();
        order.sort_by(|&a, &b| schedule[a].t.total_cmp(&schedule[b].t));
        let mut new_index = vec![0; schedule.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let mut sorted: Vec<Spawn> = order.iter().map(|&i| schedule[i].clone()).collect();
        for s in &mut sorted {
            s.partner = s.partner.map(|p| new_index[p]);
        }
        let n = sorted.len();
        Self {
            length: cfg.corridor_length,
            lanes: cfg.lanes_per_direction,
            lane_width: cfg.lane_width,
            side_x,
            waves: cfg.stop_waves.clone(),
            schedule: sorted,
            next_spawn: 0,
            queues: BTreeMap::new(),
            spawned: vec![None; n],
            vehicles: Vec::new(),
            next_id: 1,
            info: BTreeMap::new(),
        }
    }

    pub fn info(&self) -> &BTreeMap<u64, VehicleInfo> {
        &self.info
    }

    fn half_width(&self) -> f64 {
        self.lanes as f64 * self.lane_width
    }

    fn lane_y(&self, dir: Direction, lane: f64) -> f64 {
        let w2 = self.half_width();
        match dir {
            Direction::East => -w2 + (lane + 0.5) * self.lane_width,
            Direction::West => w2 - (lane + 0.5) * self.lane_width,
        }
    }

    /// Sign of the outward lateral direction for a travel direction.
    fn side(dir: Direction) -> f64 {
        match dir {
            Direction::East => -1.0,
            Direction::West => 1.0,
        }
    }

    fn to_x(&self, dir: Direction, s: f64) -> f64 {
        match dir {
            Direction::East => s,
            Direction::West => self.length - s,
        }
    }

    fn to_s(&self, dir: Direction, x: f64) -> f64 {
        self.to_x(dir, x)
    }

    fn position(&self, v: &Vehicle) -> Point2 {
        let y0 = self.lane_y(v.dir, 0.0);
        let side = Self::side(v.dir);
        match v.phase {
            Phase::Approach { a } | Phase::Merging { a } => {
                Point2::new(self.to_x(v.dir, v.s), y0 + side * a)
            }
            Phase::Exiting { x, a } => Point2::new(x, y0 + side * a),
            Phase::Main => {
                let lane = match v.lane_change {
                    Some((from, to, p)) => {
                        let w = p * p * (3.0 - 2.0 * p);
                        from as f64 + (to as f64 - from as f64) * w
                    }
                    None => v.lane as f64,
                };
                Point2::new(self.to_x(v.dir, v.s), self.lane_y(v.dir, lane))
            }
        }
    }

    pub fn states(&self) -> Vec<VehicleState> {
        let mut out: Vec<VehicleState> = self
            .vehicles
            .iter()
            .map(|v| VehicleState {
                id: v.id,
                pos: self.position(v),
                speed: v.speed,
                length: v.length,
                lane: (v.phase == Phase::Main && v.lane_change.is_none()).then_some(v.lane),
            })
            .collect();
        out.sort_by_key(|s| s.id);
        out
    }

    /// Main-road obstacles in one direction and lane, including entrants
    /// currently crossing into the outer lane.
    fn obstacles(&self, dir: Direction, lane: usize) -> Vec<Obstacle> {
        self.vehicles
            .iter()
            .filter(|v| v.dir == dir)
            .filter(|v| match v.phase {
                Phase::Main => v.occupies(lane),
                Phase::Merging { .. } => lane == 0,
                _ => false,
            })
            .map(|v| Obstacle { id: v.id, s: v.s, half: v.half(), speed: v.speed })
            .collect()
    }

    /// Spawns every scheduled vehicle due by `t` whose entry point is clear.
    pub fn spawn_due(&mut self, t: f64) {
        while self.next_spawn < self.schedule.len() && self.schedule[self.next_spawn].t <= t {
            let idx = self.next_spawn;
            self.next_spawn += 1;
            let sp = self.schedule[idx].clone();
            if sp.role == Role::Entrant {
                let id = self.register(idx, t);
                let s = self.to_s(sp.dir, self.side_x.expect("entrants need a side road"));
                let a = SIDE_ROAD_LEN + WAIT_OFFSET + self.lane_width / 2.0;
                let v = Vehicle {
                    id,
                    dir: sp.dir,
                    length: sp.length,
                    desired: sp.desired,
                    speed: SIDE_SPEED,
                    s,
                    lane: 0,
                    lane_change: None,
                    phase: Phase::Approach { a },
                    role: sp.role,
                    partner: None,
                    stopping_for: None,
                };
                self.vehicles.push(v);
            } else {
                self.queues.entry((sp.dir, sp.lane)).or_default().push_back(idx);
            }
        }
        let keys: Vec<(Direction, usize)> = self.queues.keys().copied().collect();
        for key in keys {
            while let Some(&idx) = self.queues[&key].front() {
                if !self.try_spawn_main(idx, t) {
                    break;
                }
                self.queues.get_mut(&key).expect("present").pop_front();
            }
        }
    }

    fn register(&mut self, idx: usize, t: f64) -> u64 {
        let sp = &self.schedule[idx];
        let id = self.next_id;
        self.next_id += 1;
        self.spawned[idx] = Some(id);
        self.info.insert(
            id,
            VehicleInfo {
                id,
                direction: sp.dir,
                role: sp.role,
                length: sp.length,
                desired_kmh: sp.desired * 3.6,
                spawn_t: t,
            },
        );
        id
    }

    fn try_spawn_main(&mut self, idx: usize, t: f64) -> bool {
        let sp = self.schedule[idx].clone();
        let half = sp.length / 2.0;
        let mut speed = sp.desired;
        let ahead = self
            .obstacles(sp.dir, sp.lane)
            .into_iter()
            .filter(|o| o.s >= 0.0)
            .min_by(|a, b| a.s.total_cmp(&b.s));
        if let Some(o) = ahead {
            let gap = o.s - o.half - half;
            if gap < S0 + 3.0 {
                return false;
            }
            if gap < S0 + sp.desired * T_HEAD {
                speed = speed.min(o.speed);
            }
        }
        let id = self.register(idx, t);
        let partner = sp.partner.and_then(|p| self.spawned[p]);
        self.vehicles.push(Vehicle {
            id,
            dir: sp.dir,
            length: sp.length,
            desired: sp.desired,
            speed,
            s: 0.0,
            lane: sp.lane,
            lane_change: None,
            phase: Phase::Main,
            role: sp.role,
            partner,
            stopping_for: None,
        });
        true
    }

    /// Advances every vehicle by `dt` from time `t`.
    pub fn advance(&mut self, t: f64, dt: f64) {
        self.update_side_roads(dt);
        self.start_lane_changes();
        for dir in Direction::BOTH {
            self.advance_main(dir, t, dt);
        }
        for v in &mut self.vehicles {
            if let Some((from, to, p)) = v.lane_change {
                let p = p + dt / LANE_CHANGE_S;
                if p >= 1.0 {
                    v.lane = to;
                    v.lane_change = None;
                } else {
                    v.lane_change = Some((from, to, p));
                }
            }
        }
        self.advance_exits(dt);
        self.start_diverges();
        let length = self.length;
        let exit_a = SIDE_ROAD_LEN + WAIT_OFFSET + self.lane_width / 2.0;
        self.vehicles.retain(|v| match v.phase {
            Phase::Main => v.s - v.half() <= length,
            Phase::Exiting { a, .. } => a <= exit_a,
            _ => true,
        });
    }

    fn update_side_roads(&mut self, dt: f64) {
        let wait_a = WAIT_OFFSET + self.lane_width / 2.0;
        for dir in Direction::BOTH {
            let mut ids: Vec<usize> = (0..self.vehicles.len())
                .filter(|&i| {
                    let v = &self.vehicles[i];
                    v.dir == dir && matches!(v.phase, Phase::Approach { .. } | Phase::Merging { .. })
                })
                .collect();
            ids.sort_by_key(|&i| self.vehicles[i].id);
            let mut ahead_a: Option<f64> = None;
            for i in ids {
                match self.vehicles[i].phase {
                    Phase::Merging { a } => {
                        let a = a - SIDE_SPEED * dt;
                        let v = &mut self.vehicles[i];
                        if a <= 0.0 {
                            v.phase = Phase::Main;
                            v.speed = 0.0;
                        } else {
                            v.phase = Phase::Merging { a };
                            v.speed = SIDE_SPEED;
                        }
                    }
                    Phase::Approach { a } => {
                        let mut target = (a - SIDE_SPEED * dt).max(wait_a);
                        if let Some(prev) = ahead_a {
                            target = target.max(prev + SIDE_QUEUE_GAP);
                        }
                        let target = target.min(a);
                        let at_wait = target <= wait_a + 1e-9;
                        let can_merge = at_wait && ahead_a.is_none() && self.merge_clear(i);
                        let v = &mut self.vehicles[i];
                        v.speed = (a - target) / dt;
                        if can_merge {
                            v.phase = Phase::Merging { a: target };
                            ahead_a = None;
                        } else {
                            v.phase = Phase::Approach { a: target };
                            ahead_a = Some(target);
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
    }

    fn merge_clear(&self, i: usize) -> bool {
        let me = &self.vehicles[i];
        if self.vehicles.iter().any(|v| v.dir == me.dir && matches!(v.phase, Phase::Merging { .. })) {
            return false;
        }
        self.obstacles(me.dir, 0).iter().all(|o| {
            let gap = (o.s - me.s).abs() - o.half - me.half();
            if o.s <= me.s {
                gap >= S0 + o.speed * 2.0 + 5.0
            } else {
                gap >= S0 + 3.0
            }
        })
    }

    fn start_lane_changes(&mut self) {
        for i in 0..self.vehicles.len() {
            let v = &self.vehicles[i];
            if v.role != Role::OvertakeFast || v.phase != Phase::Main || v.lane == 0 || v.lane_change.is_some() {
                continue;
            }
            if let Some(p) = v.partner.and_then(|p| self.vehicles.iter().find(|o| o.id == p)) {
                if p.phase == Phase::Main && p.dir == v.dir {
                    let lead = v.s - p.s - v.half() - p.half();
                    if lead < S0 + p.speed * T_HEAD + 3.0 {
                        continue;
                    }
                }
            }
            let target = v.lane - 1;
            let clear = self.obstacles(v.dir, target).iter().filter(|o| o.id != v.id).all(|o| {
                let gap = (o.s - v.s).abs() - o.half - v.half();
                if o.s >= v.s {
                    gap >= S0 + v.speed * 0.8
                } else {
                    gap >= S0 + o.speed * 0.8
                }
            });
            if clear {
                let from = v.lane;
                self.vehicles[i].lane_change = Some((from, target, 0.0));
            }
        }
    }

    fn start_diverges(&mut self) {
        let Some(side_x) = self.side_x else { return };
        for i in 0..self.vehicles.len() {
            let v = &self.vehicles[i];
            if v.role != Role::Diverger || v.phase != Phase::Main || v.lane != 0 || v.lane_change.is_some() {
                continue;
            }
            if v.s >= self.to_s(v.dir, side_x) {
                let x = self.to_x(v.dir, v.s);
                let v = &mut self.vehicles[i];
                v.phase = Phase::Exiting { x, a: 0.0 };
                v.speed = SIDE_SPEED.min(v.speed.max(1.0));
            }
        }
    }

    fn wave_applies(&self, w: &StopWave, v: &Vehicle) -> bool {
        w.direction == v.dir && w.lane.is_none_or(|l| v.occupies(l))
    }

    /// Stop line the vehicle will halt for, in its travel coordinate.
    fn stop_line(&mut self, i: usize, t: f64) -> Option<f64> {
        let v = &self.vehicles[i];
        let front = v.s + v.half();
        if let Some(w) = v.stopping_for {
            let wave = &self.waves[w];
            let line = self.to_s(v.dir, wave.x);
            if wave.active(t) && front <= line + 1e-9 && self.wave_applies(wave, v) {
                return Some(line);
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for (k, w) in self.waves.iter().enumerate() {
            if !w.active(t) || !self.wave_applies(w, v) {
                continue;
            }
            let line = self.to_s(v.dir, w.x);
            let gap = line - front;
            if gap >= 0.0 && gap >= v.speed * v.speed / (2.0 * B_DECIDE) && best.is_none_or(|(_, b)| line < b) {
                best = Some((k, line));
            }
        }
        self.vehicles[i].stopping_for = best.map(|b| b.0);
        best.map(|b| b.1)
    }

    fn advance_main(&mut self, dir: Direction, t: f64, dt: f64) {
        let mut idx: Vec<usize> = (0..self.vehicles.len())
            .filter(|&i| self.vehicles[i].dir == dir && self.vehicles[i].phase == Phase::Main)
            .collect();
        if idx.is_empty() {
            return;
        }
        let per_lane: Vec<Vec<Obstacle>> = (0..self.lanes).map(|l| self.obstacles(dir, l)).collect();
        let merging: Vec<Obstacle> = self
            .vehicles
            .iter()
            .filter(|v| v.dir == dir && matches!(v.phase, Phase::Merging { .. }))
            .map(|v| Obstacle { id: v.id, s: v.s, half: v.half(), speed: 0.0 })
            .collect();

        // Accelerations from the current state.
        let mut plan: Vec<(usize, f64, Option<f64>)> = Vec::with_capacity(idx.len());
        for &i in &idx {
            let line = self.stop_line(i, t);
            let v = &self.vehicles[i];
            let mut lead: Option<(f64, f64)> = None;
            for (l, obs) in per_lane.iter().enumerate() {
                if !v.occupies(l) {
                    continue;
                }
                for o in obs.iter().filter(|o| o.id != v.id && o.s > v.s) {
                    let gap = o.s - o.half - v.s - v.half();
                    if lead.is_none_or(|(g, _)| gap < g) {
                        lead = Some((gap, o.speed));
                    }
                }
            }
            if let Some(line) = line {
                let gap = line - v.s - v.half();
                if lead.is_none_or(|(g, _)| gap < g) {
                    lead = Some((gap, 0.0));
                }
            }
            let acc = idm(v.speed, v.desired, lead);
            let speed = (v.speed + acc * dt).max(0.0);
            plan.push((i, speed, line));
        }

        // Integrate front to back, clamping so nobody closes below the
        // minimum gap.
        idx.sort_by(|&a, &b| self.vehicles[b].s.total_cmp(&self.vehicles[a].s).then(self.vehicles[a].id.cmp(&self.vehicles[b].id)));
        let plan: BTreeMap<usize, (f64, Option<f64>)> = plan.into_iter().map(|(i, v, l)| (i, (v, l))).collect();
        let mut rear: Vec<Option<f64>> = vec![None; self.lanes];
        for &i in &idx {
            let (speed, line) = plan[&i];
            let v = &self.vehicles[i];
            let half = v.half();
            let mut limit = f64::INFINITY;
            for (l, r) in rear.iter().enumerate() {
                if let (true, Some(r)) = (v.occupies(l), r) {
                    limit = limit.min(r - MIN_GAP - half);
                }
            }
            if v.occupies(0) {
                for m in merging.iter().filter(|m| m.s > v.s) {
                    limit = limit.min(m.s - m.half - MIN_GAP - half);
                }
            }
            if let Some(line) = line {
                limit = limit.min(line - half);
            }
            let s_new = (v.s + speed * dt).min(limit).max(v.s);
            let actual = (s_new - v.s) / dt;
            let v = &mut self.vehicles[i];
            v.s = s_new;
            v.speed = actual;
            for (l, r) in rear.iter_mut().enumerate() {
                if v.occupies(l) {
                    *r = Some(s_new - half);
                }
            }
        }
    }

    fn advance_exits(&mut self, dt: f64) {
        for v in &mut self.vehicles {
            if let Phase::Exiting { x, a } = v.phase {
                v.phase = Phase::Exiting { x, a: a + v.speed * dt };
            }
        }
    }
}

/// Intelligent-driver acceleration toward `desired` behind an optional
/// leader given as (bumper gap, leader speed).
fn idm(v: f64, desired: f64, lead: Option<(f64, f64)>) -> f64 {
    let free = 1.0 - (v / desired).powi(4);
    let interaction = match lead {
        Some((gap, vl)) => {
            let s_star = S0 + (v * T_HEAD + v * (v - vl) / (2.0 * (A_MAX * B_COMF).sqrt())).max(0.0);
            (s_star / gap.max(0.1)).powi(2)
        }
        None => 0.0,
    };
    (A_MAX * (free - interaction)).clamp(-B_MAX, A_MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idm_is_stationary_at_desired_speed_without_leader() {
        assert_eq!(idm(15.0, 15.0, None), 0.0);
        assert!(idm(10.0, 15.0, None) > 0.0);
        assert!(idm(15.0, 15.0, Some((5.0, 0.0))) < 0.0);
    }
}
