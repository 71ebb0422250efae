//! Four-button interface board.
//!
//! | Button | Command                                   |
//! |--------|-------------------------------------------|
//! | 1      | toggle the admittance controller          |
//! | 2      | cycle admittance level 0 → 1 → 2 → 0      |
//! | 3      | toggle gripper open/closed                |
//! | 4      | toggle locomotion/manipulation priority   |
//!
//! Every accepted press publishes the full interface state as a four-element
//! message `[active, level, gripper, mode]`, stamped at the next tick of the
//! 200 Hz board loop. On the virtual wire a message is framed as
//!
//! ```text
//! +------+----+----+----+----+-----+
//! | 0xB7 | e0 | e1 | e2 | e3 | xor |
//! +------+----+----+----+----+-----+
//! ```
//!
//! where `xor = e0 ^ e1 ^ e2 ^ e3`.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::PriorityMode;
use crate::error::{Error, Result};

pub const LOOP_RATE_HZ: f64 = 200.0;
pub const DEBOUNCE_WINDOW: f64 = 0.05;
pub const FRAME_MAGIC: u8 = 0xB7;
pub const FRAME_LEN: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterfaceState {
    pub admittance_active: bool,
    /// 0 low, 1 medium, 2 high admittance.
    pub admittance_level: u8,
    pub gripper_closed: bool,
    pub priority_mode: PriorityMode,
}

impl Default for InterfaceState {
    fn default() -> Self {
        Self {
            admittance_active: false,
            admittance_level: 0,
            gripper_closed: false,
            priority_mode: PriorityMode::Manipulation,
        }
    }
}

impl InterfaceState {
    pub fn validate(&self) -> Result<()> {
        if self.admittance_level > 2 {
            return Err(Error::InvalidParameter(format!(
                "admittance level {} not in 0..=2",
                self.admittance_level
            )));
        }
        Ok(())
    }

    /// All 24 reachable states.
    pub fn enumerate() -> impl Iterator<Item = InterfaceState> {
        [false, true].into_iter().flat_map(|active| {
            (0..3u8).flat_map(move |level| {
                [false, true].into_iter().flat_map(move |gripper| {
                    [PriorityMode::Manipulation, PriorityMode::Locomotion]
                        .into_iter()
                        .map(move |mode| InterfaceState {
                            admittance_active: active,
                            admittance_level: level,
                            gripper_closed: gripper,
                            priority_mode: mode,
                        })
                })
            })
        })
    }
}

pub fn on_button_press(state: InterfaceState, button_id: u8) -> Result<InterfaceState> {
    let mut next = state;
    match button_id {
        1 => next.admittance_active = !state.admittance_active,
        2 => next.admittance_level = (state.admittance_level + 1) % 3,
        3 => next.gripper_closed = !state.gripper_closed,
        4 => next.priority_mode = state.priority_mode.toggled(),
        other => return Err(Error::InvalidButton(other)),
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ButtonMessage {
    pub values: [u8; 4],
    pub stamp: f64,
}

pub fn encode(state: &InterfaceState, stamp: f64) -> ButtonMessage {
    ButtonMessage {
        values: [
            u8::from(state.admittance_active),
            state.admittance_level,
            u8::from(state.gripper_closed),
            match state.priority_mode {
                PriorityMode::Manipulation => 0,
                PriorityMode::Locomotion => 1,
            },
        ],
        stamp,
    }
}

pub fn decode(msg: &ButtonMessage) -> Result<InterfaceState> {
    decode_values(&msg.values)
}

/// Decode a raw element array, checking its length and element ranges.
pub fn decode_values(values: &[u8]) -> Result<InterfaceState> {
    let [a, l, g, m] = <[u8; 4]>::try_from(values)
        .map_err(|_| Error::Message(format!("expected 4 elements, got {}", values.len())))?;
    let flag = |v: u8, idx: usize| match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(Error::Message(format!("element {idx} = {v} not in {{0, 1}}"))),
    };
    if l > 2 {
        return Err(Error::Message(format!("element 1 = {l} not in {{0, 1, 2}}")));
    }
    Ok(InterfaceState {
        admittance_active: flag(a, 0)?,
        admittance_level: l,
        gripper_closed: flag(g, 2)?,
        priority_mode: if flag(m, 3)? {
            PriorityMode::Locomotion
        } else {
            PriorityMode::Manipulation
        },
    })
}

pub fn frame(msg: &ButtonMessage) -> [u8; FRAME_LEN] {
    let v = msg.values;
    [FRAME_MAGIC, v[0], v[1], v[2], v[3], v[0] ^ v[1] ^ v[2] ^ v[3]]
}

/// Parse one complete frame.
pub fn unframe(bytes: &[u8]) -> Result<[u8; 4]> {
    if bytes.len() != FRAME_LEN {
        return Err(Error::Message(format!("frame length {} != {FRAME_LEN}", bytes.len())));
    }
    if bytes[0] != FRAME_MAGIC {
        return Err(Error::Message(format!("bad magic byte {:#04x}", bytes[0])));
    }
    let payload = [bytes[1], bytes[2], bytes[3], bytes[4]];
    let xor = payload.iter().fold(0, |acc, b| acc ^ b);
    if xor != bytes[5] {
        return Err(Error::Message(format!("checksum {:#04x} != {xor:#04x}", bytes[5])));
    }
    Ok(payload)
}

/// Byte-stream reassembler: resynchronizes on the magic byte and drops
/// frames that fail the checksum.
#[derive(Debug, Default)]
pub struct FrameReader {
    buf: Vec<u8>,
    rejected: usize,
}

impl FrameReader {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of corrupt candidate frames skipped so far.
    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn push(&mut self, bytes: &[u8]) -> Vec<[u8; 4]> {
        self.buf.extend_from_slice(bytes);
        let mut out = Vec::new();
        loop {
            match self.buf.iter().position(|&b| b == FRAME_MAGIC) {
                None => {
                    self.buf.clear();
                    break;
                }
                Some(start) => {
                    self.buf.drain(..start);
                }
            }
            if self.buf.len() < FRAME_LEN {
                break;
            }
            match unframe(&self.buf[..FRAME_LEN]) {
                Ok(payload) => {
                    out.push(payload);
                    self.buf.drain(..FRAME_LEN);
                }
                Err(_) => {
                    self.rejected += 1;
                    self.buf.drain(..1);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressEvent {
    /// Press time (s).
    pub t: f64,
    /// Button id, 1..=4.
    pub id: u8,
}

/// Parse a press script: one `<time_s> <button_id>` pair per line; blank
/// lines and `#` comments are ignored.
pub fn parse_press_script(text: &str, origin: &str) -> Result<Vec<PressEvent>> {
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: origin.to_string(),
            line: i + 1,
            msg,
        };
        let mut parts = line.split_whitespace();
        let (Some(t), Some(id), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(format!("expected `<time_s> <button_id>`, got `{line}`")));
        };
        let t: f64 = t.parse().map_err(|_| err(format!("invalid time `{t}`")))?;
        let id: u8 = id.parse().map_err(|_| err(format!("invalid button id `{id}`")))?;
        if !(1..=4).contains(&id) {
            return Err(err(format!("button id {id} not in 1..=4")));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(err(format!("time {t} must be finite and >= 0")));
        }
        if events.last().is_some_and(|e: &PressEvent| e.t > t) {
            return Err(err("press times must be non-decreasing".into()));
        }
        events.push(PressEvent { t, id });
    }
    Ok(events)
}

pub fn load_press_script(path: &Path) -> Result<Vec<PressEvent>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_press_script(&text, &path.display().to_string())
}

/// Collapse presses of the same button closer than `window` seconds to the
/// previously accepted press of that button.
pub fn debounce(events: &[PressEvent], window: f64) -> Vec<PressEvent> {
    let mut last = [f64::NEG_INFINITY; 5];
    let mut out = Vec::with_capacity(events.len());
    for e in events {
        let slot = usize::from(e.id.min(4));
        if e.t - last[slot] >= window {
            last[slot] = e.t;
            out.push(*e);
        }
    }
    out
}

/// First tick of a loop running at `rate` at or after `t`.
pub fn next_tick(t: f64, rate: f64) -> f64 {
    let k = (t * rate - 1e-9).ceil().max(0.0);
    k / rate
}

/// Run the board loop over time-sorted presses; one message per press,
/// stamped at the next tick, same-tick presses applied in order.
pub fn poll_loop(
    initial: InterfaceState,
    events: &[PressEvent],
    loop_rate: f64,
) -> Result<Vec<ButtonMessage>> {
    if !(loop_rate > 0.0) {
        return Err(Error::InvalidParameter(format!("loop rate {loop_rate} must be positive")));
    }
    let mut state = initial;
    let mut out = Vec::with_capacity(events.len());
    for e in events {
        state = on_button_press(state, e.id)?;
        out.push(encode(&state, next_tick(e.t, loop_rate)));
    }
    Ok(out)
}

/// FIFO between the board and the robot state machine. Bounded; never
/// drops or duplicates.
#[derive(Debug)]
pub struct MessageQueue {
    items: VecDeque<ButtonMessage>,
    capacity: usize,
}

impl MessageQueue {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            items: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    /// Returns the message back if the queue is full.
    pub fn push(&mut self, msg: ButtonMessage) -> Result<(), ButtonMessage> {
        if self.items.len() >= self.capacity {
            return Err(msg);
        }
        self.items.push_back(msg);
        Ok(())
    }

    /// Pop every message stamped at or before `now`, in order.
    pub fn drain_until(&mut self, now: f64) -> Vec<ButtonMessage> {
        let mut out = Vec::new();
        while self.items.front().is_some_and(|m| m.stamp <= now + 1e-12) {
            out.extend(self.items.pop_front());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_wraps() {
        let s = InterfaceState {
            admittance_level: 2,
            ..Default::default()
        };
        assert_eq!(on_button_press(s, 2).unwrap().admittance_level, 0);
    }

    #[test]
    fn toggles_are_involutions() {
        for s in InterfaceState::enumerate() {
            for id in [1, 3, 4] {
                let once = on_button_press(s, id).unwrap();
                assert_ne!(once, s);
                assert_eq!(on_button_press(once, id).unwrap(), s);
            }
            let mut cyc = s;
            for _ in 0..3 {
                cyc = on_button_press(cyc, 2).unwrap();
            }
            assert_eq!(cyc, s);
        }
    }

    #[test]
    fn toggles_touch_only_their_field() {
        let s = InterfaceState::default();
        let a = on_button_press(s, 1).unwrap();
        assert_eq!((a.admittance_level, a.gripper_closed, a.priority_mode), (0, false, PriorityMode::Manipulation));
        let m = on_button_press(s, 4).unwrap();
        assert_eq!(m.priority_mode, PriorityMode::Locomotion);
        assert!(!m.admittance_active && !m.gripper_closed);
    }

    #[test]
    fn invalid_buttons() {
        assert!(matches!(on_button_press(InterfaceState::default(), 0), Err(Error::InvalidButton(0))));
        assert!(on_button_press(InterfaceState::default(), 5).is_err());
    }

    #[test]
    fn default_encodes_to_zeros() {
        assert_eq!(encode(&InterfaceState::default(), 0.0).values, [0, 0, 0, 0]);
    }

    #[test]
    fn codec_round_trip_is_exhaustive() {
        let all: Vec<_> = InterfaceState::enumerate().collect();
        assert_eq!(all.len(), 24);
        for s in all {
            let msg = encode(&s, 1.0);
            assert_eq!(decode(&msg).unwrap(), s);
            assert_eq!(decode_values(&unframe(&frame(&msg)).unwrap()).unwrap(), s);
        }
    }

    #[test]
    fn decode_rejects_bad_messages() {
        assert!(decode_values(&[0, 3, 0, 0]).is_err());
        assert!(decode_values(&[2, 0, 0, 0]).is_err());
        assert!(decode_values(&[0, 0, 0, 7]).is_err());
        assert!(decode_values(&[0, 0, 0]).is_err());
        assert!(decode_values(&[0, 0, 0, 0, 0]).is_err());
    }

    #[test]
    fn frame_layout_is_bit_exact() {
        let msg = ButtonMessage {
            values: [1, 2, 1, 0],
            stamp: 0.0,
        };
        assert_eq!(frame(&msg), [0xB7, 1, 2, 1, 0, 2]);
        assert!(unframe(&[0xB7, 1, 2, 1, 0, 3]).is_err());
        assert!(unframe(&[0xB6, 1, 2, 1, 0, 2]).is_err());
    }

    #[test]
    fn reader_resyncs_after_noise() {
        let a = frame(&ButtonMessage { values: [1, 0, 0, 0], stamp: 0.0 });
        let b = frame(&ButtonMessage { values: [1, 1, 1, 1], stamp: 0.0 });
        let mut stream = vec![0x00, 0xB7, 0x42];
        stream.extend_from_slice(&a);
        stream.extend_from_slice(&b[..3]);
        let mut reader = FrameReader::new();
        let first = reader.push(&stream);
        assert_eq!(first, vec![[1, 0, 0, 0]]);
        assert_eq!(reader.push(&b[3..]), vec![[1, 1, 1, 1]]);
        assert!(reader.rejected() >= 1);
    }

    #[test]
    fn tick_quantization() {
        let msgs = poll_loop(InterfaceState::default(), &[PressEvent { t: 0.0012, id: 1 }], LOOP_RATE_HZ).unwrap();
        assert_eq!(msgs.len(), 1);
        assert!((msgs[0].stamp - 0.005).abs() < 1e-15);
        assert!(poll_loop(InterfaceState::default(), &[], LOOP_RATE_HZ).unwrap().is_empty());
        assert_eq!(next_tick(0.005, LOOP_RATE_HZ), 0.005);
        assert_eq!(next_tick(0.0, LOOP_RATE_HZ), 0.0);
    }

    #[test]
    fn same_tick_presses_are_sequential() {
        let events = [PressEvent { t: 0.0101, id: 2 }, PressEvent { t: 0.0102, id: 2 }];
        let msgs = poll_loop(InterfaceState::default(), &events, LOOP_RATE_HZ).unwrap();
        assert_eq!(msgs.len(), 2);
        assert_eq!(msgs[0].stamp, msgs[1].stamp);
        assert_eq!(msgs[0].values[1], 1);
        assert_eq!(msgs[1].values[1], 2);
    }

    #[test]
    fn debounce_collapses_bounces() {
        let events = [
            PressEvent { t: 1.0, id: 3 },
            PressEvent { t: 1.01, id: 3 },
            PressEvent { t: 1.02, id: 1 },
            PressEvent { t: 1.049, id: 3 },
            PressEvent { t: 1.06, id: 3 },
        ];
        let out = debounce(&events, DEBOUNCE_WINDOW);
        assert_eq!(out, vec![events[0], events[2], events[4]]);
    }

    #[test]
    fn press_script_parsing() {
        let text = "# phase 1\n0.5 1\n\n1.0 3  # grasp\n1.5 4\n";
        let ev = parse_press_script(text, "s.txt").unwrap();
        assert_eq!(ev.iter().map(|e| e.id).collect::<Vec<_>>(), vec![1, 3, 4]);
        match parse_press_script("0.5 1\n0.7 9\n", "s.txt") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_press_script("1.0 1\n0.5 2\n", "s.txt").is_err());
    }

    #[test]
    fn queue_is_bounded_fifo() {
        let mut q = MessageQueue::with_capacity(2);
        let m = |t| encode(&InterfaceState::default(), t);
        q.push(m(0.005)).unwrap();
        q.push(m(0.010)).unwrap();
        assert!(q.push(m(0.015)).is_err());
        assert_eq!(q.drain_until(0.0).len(), 0);
        let out = q.drain_until(0.010);
        assert_eq!(out.iter().map(|m| m.stamp).collect::<Vec<_>>(), vec![0.005, 0.010]);
        assert!(q.is_empty());
    }
}
