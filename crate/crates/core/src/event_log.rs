//! Record/replay of SLAM event streams.
//!
//! The log is line-delimited JSON: a versioned header line followed by one
//! self-describing record per event. Submap grids are not inlined; each
//! submap record references a slice (offset + length) of a sidecar binary
//! file holding the row-major 16-bit cell storage, little-endian.

use crate::event::{Event, PoseGraphSolution};
use crate::grid::{Submap, SubmapId};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("event log I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("event log record {record}: {reason}")]
    Corrupt { record: usize, reason: String },
    #[error("unsupported event log format version {0}")]
    UnsupportedVersion(u32),
}

/// First line of every log file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogHeader {
    pub format_version: u32,
    pub resolution: f64,
    pub n_scans: u32,
    /// Resolved run configuration, embedded for reproducibility.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl LogHeader {
    pub fn new(resolution: f64, n_scans: u32) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            resolution,
            n_scans,
            config: None,
        }
    }
}

/// Path of the sidecar grid blob belonging to a log file.
pub fn sidecar_path(log_path: &Path) -> PathBuf {
    let mut name = log_path.file_name().unwrap_or_default().to_os_string();
    name.push(".grids");
    log_path.with_file_name(name)
}

#[derive(Debug, Serialize, Deserialize)]
struct GridRef {
    offset: u64,
    len: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SubmapRecord {
    id: SubmapId,
    resolution: f64,
    offset: [i32; 2],
    width: usize,
    height: usize,
    inserted_scans: u32,
    scan_quota: u32,
    finished: bool,
    grid: GridRef,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Record {
    Scan {
        epoch: u64,
        submaps: Vec<SubmapRecord>,
        poses: PoseGraphSolution,
    },
    Finished {
        epoch: u64,
        id: SubmapId,
    },
    Optimized {
        epoch: u64,
        solution: PoseGraphSolution,
    },
}

/// Streaming writer: header first, then one record per `append`.
pub struct EventLogWriter {
    log: BufWriter<File>,
    grids: BufWriter<File>,
    grid_offset: u64,
    last_epoch: u64,
}

impl EventLogWriter {
    pub fn create(path: &Path, header: &LogHeader) -> Result<Self, LogError> {
        let mut log = BufWriter::new(File::create(path)?);
        let grids = BufWriter::new(File::create(sidecar_path(path))?);
        serde_json::to_writer(&mut log, header).map_err(|e| LogError::Corrupt {
            record: 0,
            reason: e.to_string(),
        })?;
        log.write_all(b"\n")?;
        Ok(Self {
            log,
            grids,
            grid_offset: 0,
            last_epoch: 0,
        })
    }

    fn write_grid(&mut self, submap: &Submap) -> Result<GridRef, LogError> {
        let cells = submap.raw_cells();
        let mut bytes = Vec::with_capacity(cells.len() * 2);
        for cell in cells {
            bytes.extend_from_slice(&cell.to_le_bytes());
        }
        self.grids.write_all(&bytes)?;
        let grid_ref = GridRef {
            offset: self.grid_offset,
            len: bytes.len() as u64,
        };
        self.grid_offset += bytes.len() as u64;
        Ok(grid_ref)
    }

    pub fn append(&mut self, event: &Event) -> Result<(), LogError> {
        let record = match event {
            Event::ScanInserted { submaps, poses } => {
                self.last_epoch = poses.epoch;
                let mut records = Vec::with_capacity(submaps.len());
                for submap in submaps {
                    let grid = self.write_grid(submap)?;
                    let (width, height) = submap.dimensions();
                    records.push(SubmapRecord {
                        id: submap.id(),
                        resolution: submap.resolution(),
                        offset: submap.offset(),
                        width,
                        height,
                        inserted_scans: submap.inserted_scans(),
                        scan_quota: submap.scan_quota(),
                        finished: submap.is_finished(),
                        grid,
                    });
                }
                Record::Scan {
                    epoch: poses.epoch,
                    submaps: records,
                    poses: poses.clone(),
                }
            }
            Event::SubmapFinished { id } => Record::Finished {
                epoch: self.last_epoch,
                id: *id,
            },
            Event::OptimizationDone { solution } => {
                self.last_epoch = solution.epoch;
                Record::Optimized {
                    epoch: solution.epoch,
                    solution: solution.clone(),
                }
            }
        };
        let line = serde_json::to_string(&record).map_err(|e| LogError::Corrupt {
            record: 0,
            reason: e.to_string(),
        })?;
        self.log.write_all(line.as_bytes())?;
        self.log.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), LogError> {
        self.log.flush()?;
        self.grids.flush()?;
        Ok(())
    }
}

/// Write a whole event stream to `path` (sidecar next to it).
pub fn write_event_log(path: &Path, header: &LogHeader, events: &[Event]) -> Result<(), LogError> {
    let mut writer = EventLogWriter::create(path, header)?;
    for event in events {
        writer.append(event)?;
    }
    writer.finish()
}

/// Read a whole event log back. Errors name the failing record (the header
/// is record 0, events count from 1).
pub fn read_event_log(path: &Path) -> Result<(LogHeader, Vec<Event>), LogError> {
    let file = BufReader::new(File::open(path)?);
    let mut grids = Vec::new();
    File::open(sidecar_path(path))?.read_to_end(&mut grids)?;

    let mut lines = file.lines();
    let header_line = lines.next().ok_or_else(|| LogError::Corrupt {
        record: 0,
        reason: "empty log".into(),
    })??;
    let header: LogHeader = serde_json::from_str(&header_line).map_err(|e| LogError::Corrupt {
        record: 0,
        reason: e.to_string(),
    })?;
    if header.format_version != FORMAT_VERSION {
        return Err(LogError::UnsupportedVersion(header.format_version));
    }

    let mut events = Vec::new();
    for (i, line) in lines.enumerate() {
        let record_index = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| LogError::Corrupt {
            record: record_index,
            reason: e.to_string(),
        })?;
        events.push(decode(record, &grids, record_index)?);
    }
    Ok((header, events))
}

fn decode(record: Record, grids: &[u8], record_index: usize) -> Result<Event, LogError> {
    Ok(match record {
        Record::Scan { submaps, poses, .. } => {
            let mut decoded = Vec::with_capacity(submaps.len());
            for record in submaps {
                let start = record.grid.offset as usize;
                let end = start + record.grid.len as usize;
                if end > grids.len()
                    || record.grid.len as usize != record.width * record.height * 2
                {
                    return Err(LogError::Corrupt {
                        record: record_index,
                        reason: format!(
                            "grid reference {}..{} outside sidecar ({} bytes) or wrong size",
                            start,
                            end,
                            grids.len()
                        ),
                    });
                }
                let cells: Vec<u16> = grids[start..end]
                    .chunks_exact(2)
                    .map(|b| u16::from_le_bytes([b[0], b[1]]))
                    .collect();
                decoded.push(Arc::new(Submap::from_parts(
                    record.id,
                    record.resolution,
                    record.offset,
                    record.width,
                    record.height,
                    cells,
                    record.inserted_scans,
                    record.scan_quota,
                    record.finished,
                )));
            }
            Event::ScanInserted {
                submaps: decoded,
                poses,
            }
        }
        Record::Finished { id, .. } => Event::SubmapFinished { id },
        Record::Optimized { solution, .. } => Event::OptimizationDone { solution },
    })
}
