use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use termsuggest::analytics::LogRecord;
use tokio::sync::oneshot;

struct Job {
    line: String,
    ack: oneshot::Sender<Result<(), String>>,
}

/// Append-only event log with a single writer thread.
///
/// Records queued while a write is in flight are written and synced as one
/// batch. `append` returns only after its record is on disk.
#[derive(Clone)]
pub struct EventLog {
    path: PathBuf,
    tx: mpsc::Sender<Job>,
}

/// Cuts off a partial last line left by a crash. Such a record was never
/// acknowledged. Returns the number of bytes removed.
fn drop_torn_tail(file: &mut File) -> io::Result<u64> {
    let len = file.seek(SeekFrom::End(0))?;
    let mut end = len;
    let mut block = vec![0u8; 64 * 1024];
    while end > 0 {
        let start = end.saturating_sub(block.len() as u64);
        let chunk = &mut block[..(end - start) as usize];
        file.seek(SeekFrom::Start(start))?;
        file.read_exact(chunk)?;
        if let Some(i) = chunk.iter().rposition(|&b| b == b'\n') {
            end = start + i as u64 + 1;
            break;
        }
        end = start;
    }
    if end < len {
        file.set_len(end)?;
        file.sync_data()?;
    }
    Ok(len - end)
}

impl EventLog {
    pub fn open(path: &Path) -> io::Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new().create(true).read(true).append(true).open(path)?;
        let torn = drop_torn_tail(&mut file)?;
        if torn > 0 {
            eprintln!("{}: dropped {torn} bytes of an incomplete record", path.display());
        }
        let (tx, rx) = mpsc::channel::<Job>();
        std::thread::Builder::new()
            .name("event-log".into())
            .spawn(move || {
                while let Ok(first) = rx.recv() {
                    let mut batch = vec![first];
                    batch.extend(rx.try_iter());
                    let buf: String = batch.iter().map(|j| j.line.as_str()).collect();
                    let result = file
                        .write_all(buf.as_bytes())
                        .and_then(|_| file.sync_data())
                        .map_err(|e| e.to_string());
                    for job in batch {
                        let _ = job.ack.send(result.clone());
                    }
                }
            })?;
        Ok(EventLog {
            path: path.to_path_buf(),
            tx,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub async fn append(&self, record: &LogRecord) -> io::Result<()> {
        let (ack, done) = oneshot::channel();
        self.tx
            .send(Job {
                line: record.to_line(),
                ack,
            })
            .map_err(|_| io::Error::other("log writer stopped"))?;
        done.await
            .map_err(|_| io::Error::other("log writer stopped"))?
            .map_err(io::Error::other)
    }
}
