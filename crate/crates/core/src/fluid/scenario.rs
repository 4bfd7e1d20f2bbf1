//! Fluid view of a packet-level scenario.

use std::collections::BTreeMap;

use num_rational::BigRational;

use super::omega::{FluidPolicy, FluidQueueSpec};
use super::transient::TransientScenario;
use crate::error::FluidError;
use crate::model::{QueueId, QueueMode};
use crate::policy::PolicyKind;
use crate::workload::{ScenarioConfig, SourceKind};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFluid {
    pub policy: FluidPolicy,
    pub buffer: BigRational,
    /// Queues fed by background sources, assumed congested.
    pub old: Vec<FluidQueueSpec>,
    /// Queues fed by bursts.
    pub new: Vec<FluidQueueSpec>,
    /// Common burst rate, if the scenario has bursts.
    pub rate: Option<BigRational>,
}

impl ScenarioFluid {
    pub fn transient(&self) -> Option<TransientScenario> {
        let rate = self.rate.clone()?;
        Some(TransientScenario::build(
            self.policy,
            self.buffer.clone(),
            &self.old,
            &self.new,
            rate,
        ))
    }
}

/// Map a scenario onto the fluid model: background sources make their queue
/// part of the steady state, bursts make theirs a new queue. FBA is analysed
/// as FB.
pub fn scenario_fluid(cfg: &ScenarioConfig) -> Result<ScenarioFluid, FluidError> {
    let policy = match cfg.policy {
        PolicyKind::DynamicThresholds => FluidPolicy::Dt,
        PolicyKind::Fb | PolicyKind::Fba(_) if cfg.mode == QueueMode::Multi => FluidPolicy::Fb,
        other => {
            return Err(FluidError::UnsupportedPolicy(format!(
                "{other} in {:?} mode",
                cfg.mode
            )))
        }
    };
    let spec = |port: usize, class| -> Result<FluidQueueSpec, FluidError> {
        let c = cfg.class(class).ok_or(FluidError::InvalidArgument {
            name: "class",
            message: format!("class {class} is not defined"),
        })?;
        Ok(FluidQueueSpec {
            id: QueueId { port, class },
            alpha: super::from_frac(c.alpha),
            priority: c.priority,
        })
    };
    let mut old: BTreeMap<QueueId, FluidQueueSpec> = BTreeMap::new();
    let mut new: BTreeMap<QueueId, FluidQueueSpec> = BTreeMap::new();
    let mut rate: Option<f64> = None;
    for s in &cfg.sources {
        let q = spec(s.port, s.class)?;
        match &s.kind {
            SourceKind::Burst { rate: r, .. } => {
                if rate.is_some_and(|x| x != *r) {
                    return Err(FluidError::InvalidArgument {
                        name: "rate",
                        message: "bursts with different rates".into(),
                    });
                }
                rate = Some(*r);
                new.insert(q.id, q);
            }
            SourceKind::Constant { .. } | SourceKind::Poisson { .. } => {
                old.insert(q.id, q);
            }
        }
    }
    if let Some(id) = new.keys().find(|id| old.contains_key(id)) {
        return Err(FluidError::InvalidArgument {
            name: "sources",
            message: format!("queue {id} has both background and burst traffic"),
        });
    }
    let rate = rate
        .map(|r| {
            super::from_f64(r).ok_or(FluidError::InvalidArgument {
                name: "rate",
                message: format!("{r} is not finite"),
            })
        })
        .transpose()?;
    Ok(ScenarioFluid {
        policy,
        buffer: super::int(cfg.buffer as i64),
        old: old.into_values().collect(),
        new: new.into_values().collect(),
        rate,
    })
}
