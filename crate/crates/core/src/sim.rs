//! Discrete-time preemptive fixed-priority uniprocessor simulator.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, TaskSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRelease {
    pub arrival: i64,
    pub release: i64,
}

/// Jobs of every task, in task order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleasePattern {
    pub jobs: Vec<Vec<JobRelease>>,
}

impl ReleasePattern {
    /// Arrivals at least `p_i` apart, releases within `[arrival, arrival + ξ_i]`.
    pub fn validate(&self, ts: &TaskSystem) -> Result<()> {
        model::validate(ts)?;
        if self.jobs.len() != ts.len() {
            return Err(Error::InvalidInstance(format!(
                "pattern has {} tasks, system has {}",
                self.jobs.len(),
                ts.len()
            )));
        }
        for (i, (task, jobs)) in ts.tasks.iter().zip(&self.jobs).enumerate() {
            for (k, job) in jobs.iter().enumerate() {
                if job.arrival < 0 {
                    return Err(Error::InvalidInstance(format!("task {i} job {k}: negative arrival")));
                }
                let lag = job.release - job.arrival;
                if lag < 0 || lag > task.jitter {
                    return Err(Error::InvalidInstance(format!(
                        "task {i} job {k}: release lag {lag} outside [0, {}]",
                        task.jitter
                    )));
                }
                if k > 0 && job.arrival - jobs[k - 1].arrival < task.p {
                    return Err(Error::InvalidInstance(format!(
                        "task {i} job {k}: arrivals closer than p = {}",
                        task.p
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: i64,
    pub end: i64,
    /// `None` while idle.
    pub task: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRecord {
    pub task: usize,
    pub job: usize,
    pub arrival: i64,
    pub release: i64,
    pub completion: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleTrace {
    pub horizon: i64,
    pub segments: Vec<Segment>,
    /// Jobs released before the horizon, all completed.
    pub jobs: Vec<JobRecord>,
}

struct Pending {
    task: usize,
    job: usize,
    arrival: i64,
    release: i64,
    left: i64,
}

/// Run the schedule on `[0, horizon)`. The highest-priority released job
/// runs; jobs of one task run in arrival order. Every job released before
/// the horizon must complete by it.
pub fn simulate(ts: &TaskSystem, rp: &ReleasePattern, horizon: i64) -> Result<ScheduleTrace> {
    rp.validate(ts)?;
    if horizon < 0 {
        return Err(Error::InvalidInstance(format!("horizon {horizon} is negative")));
    }
    let mut future: Vec<Pending> = Vec::new();
    for (task, jobs) in rp.jobs.iter().enumerate() {
        for (job, r) in jobs.iter().enumerate() {
            if r.release < horizon {
                future.push(Pending { task, job, arrival: r.arrival, release: r.release, left: ts.tasks[task].c });
            }
        }
    }
    // pop from the back in release order
    future.sort_by_key(|p| std::cmp::Reverse((p.release, p.task, p.arrival)));

    let mut ready: Vec<Pending> = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();
    let mut done: Vec<JobRecord> = Vec::new();
    let mut now = 0i64;
    let push = |segments: &mut Vec<Segment>, start: i64, end: i64, task: Option<usize>| {
        if start == end {
            return;
        }
        match segments.last_mut() {
            Some(last) if last.task == task && last.end == start => last.end = end,
            _ => segments.push(Segment { start, end, task }),
        }
    };

    while now < horizon {
        while future.last().is_some_and(|p| p.release <= now) {
            ready.push(future.pop().unwrap());
        }
        let next_release = future.last().map_or(horizon, |p| p.release.min(horizon));
        let pick = ready.iter().enumerate().min_by_key(|(_, p)| (p.task, p.arrival)).map(|(i, _)| i);
        match pick {
            None => {
                push(&mut segments, now, next_release, None);
                now = next_release;
            }
            Some(i) => {
                let run = ready[i].left.min(next_release - now);
                push(&mut segments, now, now + run, Some(ready[i].task));
                now += run;
                ready[i].left -= run;
                if ready[i].left == 0 {
                    let p = ready.swap_remove(i);
                    done.push(JobRecord {
                        task: p.task,
                        job: p.job,
                        arrival: p.arrival,
                        release: p.release,
                        completion: now,
                    });
                }
            }
        }
    }
    if let Some(p) = ready.iter().min_by_key(|p| (p.release, p.task)) {
        return Err(Error::HorizonTooSmall { horizon, task: p.task, release: p.release });
    }
    done.sort_by_key(|j| (j.task, j.job));
    Ok(ScheduleTrace { horizon, segments, jobs: done })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    FromRelease,
    FromArrival,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ObservedResponse {
    pub task: usize,
    pub job: usize,
    pub response: i64,
}

pub fn observed_responses(trace: &ScheduleTrace, measure: Measure) -> Vec<ObservedResponse> {
    trace
        .jobs
        .iter()
        .map(|j| ObservedResponse {
            task: j.task,
            job: j.job,
            response: j.completion
                - match measure {
                    Measure::FromRelease => j.release,
                    Measure::FromArrival => j.arrival,
                },
        })
        .collect()
}

/// One line per task: `#` while running, `-` while released but waiting.
pub fn render_gantt(ts: &TaskSystem, trace: &ScheduleTrace) -> String {
    let width = trace.horizon.max(0) as usize;
    let mut rows = vec![vec![' '; width]; ts.len()];
    for j in &trace.jobs {
        for t in j.release..j.completion {
            rows[j.task][t as usize] = '-';
        }
    }
    for s in &trace.segments {
        if let Some(task) = s.task {
            for t in s.start..s.end {
                rows[task][t as usize] = '#';
            }
        }
    }
    let mut out = String::new();
    let mut ruler: Vec<char> = vec![' '; width];
    for t in (0..width).step_by(10) {
        for (k, ch) in t.to_string().chars().enumerate() {
            if t + k < width {
                ruler[t + k] = ch;
            }
        }
    }
    let label = format!("T{}", ts.len());
    let pad = label.len();
    let _ = writeln!(out, "{:pad$} |{}|", "", ruler.iter().collect::<String>());
    for (i, row) in rows.iter().enumerate() {
        let _ = writeln!(out, "{:pad$} |{}|", format!("T{}", i + 1), row.iter().collect::<String>());
    }
    out
}
