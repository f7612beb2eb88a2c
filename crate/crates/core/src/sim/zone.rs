//! Interaction zones: agents entering a zone ignore it, queue for it, or
//! start a joint activity once enough agents are waiting.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::agent::{AgentId, AgentMode, AgentState};
use super::world::ZoneSpec;

/// Behavior knobs shared by all zones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneParams {
    /// Probability that an entering agent ignores the zone.
    pub p_ignore: f64,
    /// After ignoring (or finishing at) a zone, the agent does not reconsider it for this long.
    pub ignore_memory_s: f64,
}

impl Default for ZoneParams {
    fn default() -> Self {
        Self {
            p_ignore: 0.5,
            ignore_memory_s: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZoneEvent {
    Ignored(AgentId),
    Enqueued(AgentId),
    Dequeued(AgentId),
    /// Interaction started; carries the participants and the step at which it ends.
    Started {
        agents: Vec<AgentId>,
        until_step: u64,
    },
    Finished(Vec<AgentId>),
}

/// Zone with its dynamic queue/activity state.
#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub index: usize,
    pub spec: ZoneSpec,
    pub queue: Vec<AgentId>,
    pub active: BTreeSet<AgentId>,
    /// Step at which the running interaction ends.
    pub active_until_step: u64,
    /// Agents inside `radius` at the previous update.
    inside: BTreeSet<AgentId>,
    /// Agent -> step until which the zone is not reconsidered.
    ignored_until: BTreeMap<AgentId, u64>,
}

impl Zone {
    pub fn new(index: usize, spec: ZoneSpec) -> Self {
        Self {
            index,
            spec,
            queue: Vec::new(),
            active: BTreeSet::new(),
            active_until_step: 0,
            inside: BTreeSet::new(),
            ignored_until: BTreeMap::new(),
        }
    }

    pub fn contains(&self, id: AgentId) -> bool {
        self.queue.contains(&id) || self.active.contains(&id)
    }

    /// Position an active participant holds during the interaction.
    pub fn slot(&self, id: AgentId) -> Option<nalgebra::Vector2<f64>> {
        let k = self.active.iter().position(|a| *a == id)?;
        let n = self.active.len() as f64;
        let angle = std::f64::consts::TAU * k as f64 / n;
        let r = self.spec.radius * 0.4;
        Some(self.spec.center + nalgebra::Vector2::new(angle.cos(), angle.sin()) * r)
    }

    /// Advances the zone by one step. `agents` reflects the state after
    /// movement; agent modes are not modified here, see [`apply_events`].
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        agents: &[AgentState],
        step: u64,
        fps: u32,
        params: &ZoneParams,
        rng: &mut R,
    ) -> Vec<ZoneEvent> {
        let mut events = Vec::new();
        let memory_steps = (params.ignore_memory_s * fps as f64).round() as u64;

        if !self.active.is_empty() && step >= self.active_until_step {
            let done: Vec<AgentId> = std::mem::take(&mut self.active).into_iter().collect();
            for id in &done {
                self.ignored_until.insert(*id, step + memory_steps);
            }
            events.push(ZoneEvent::Finished(done));
        }

        let by_id: BTreeMap<AgentId, &AgentState> = agents.iter().map(|a| (a.id, a)).collect();
        let leave2 = self.spec.leave_radius * self.spec.leave_radius;
        let mut kept = Vec::with_capacity(self.queue.len());
        for id in std::mem::take(&mut self.queue) {
            let still_near = by_id
                .get(&id)
                .is_some_and(|a| (a.position - self.spec.center).norm_squared() <= leave2);
            if still_near {
                kept.push(id);
            } else {
                events.push(ZoneEvent::Dequeued(id));
            }
        }
        self.queue = kept;

        let r2 = self.spec.radius * self.spec.radius;
        let mut inside_now = BTreeSet::new();
        for a in agents {
            if (a.position - self.spec.center).norm_squared() > r2 {
                continue;
            }
            inside_now.insert(a.id);
            let entering = !self.inside.contains(&a.id);
            if !entering || a.mode != AgentMode::Walking || self.contains(a.id) {
                continue;
            }
            if self
                .ignored_until
                .get(&a.id)
                .is_some_and(|until| step < *until)
            {
                continue;
            }
            if rng.random::<f64>() < params.p_ignore {
                self.ignored_until.insert(a.id, step + memory_steps);
                events.push(ZoneEvent::Ignored(a.id));
            } else {
                self.queue.push(a.id);
                events.push(ZoneEvent::Enqueued(a.id));
            }
        }
        self.inside = inside_now;
        self.ignored_until.retain(|_, until| *until > step);

        if self.active.is_empty() && self.queue.len() >= self.spec.required_agents {
            let starting: Vec<AgentId> = self.queue.drain(..self.spec.required_agents).collect();
            self.active.extend(starting.iter().copied());
            let steps = (self.spec.duration_s * fps as f64).round().max(1.0) as u64;
            self.active_until_step = step + steps;
            events.push(ZoneEvent::Started {
                agents: starting,
                until_step: self.active_until_step,
            });
        }
        events
    }

    /// Remaining interaction time at `step`.
    pub fn remaining_s(&self, step: u64, fps: u32) -> f64 {
        self.active_until_step.saturating_sub(step) as f64 / fps as f64
    }
}

/// Applies zone events to agent modes. Returns ids of agents that finished
/// an interaction and need a new route.
pub fn apply_events(
    zone: &Zone,
    events: &[ZoneEvent],
    agents: &mut [AgentState],
    step: u64,
    fps: u32,
) -> Vec<AgentId> {
    let mut released = Vec::new();
    let mut set_mode = |id: AgentId, mode: AgentMode| {
        if let Some(a) = agents.iter_mut().find(|a| a.id == id) {
            a.mode = mode;
        }
    };
    for ev in events {
        match ev {
            ZoneEvent::Ignored(_) => {}
            ZoneEvent::Enqueued(id) => set_mode(*id, AgentMode::Queued { zone: zone.index }),
            ZoneEvent::Dequeued(id) => set_mode(*id, AgentMode::Walking),
            ZoneEvent::Started { agents: ids, .. } => {
                for id in ids {
                    set_mode(
                        *id,
                        AgentMode::Interacting {
                            zone: zone.index,
                            remaining_s: zone.remaining_s(step, fps),
                        },
                    );
                }
            }
            ZoneEvent::Finished(ids) => {
                for id in ids {
                    set_mode(*id, AgentMode::Walking);
                    released.push(*id);
                }
            }
        }
    }
    released
}
