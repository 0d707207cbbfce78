"""
Эмбеддинги части корпуса:

    <dir>/index.json              система, размерность, порядок записей
    <dir>/<recording>.fmat        матрица N×d
    <dir>/<recording>.times.json  начала и концы окон (с)
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from src.core.exceptions import DataError
from src.core.models.embedding import EmbeddingSet
from src.core.utils.json import dump_json, load_json
from src.infra.storage.fmat import read_fmat, write_fmat

INDEX = "index.json"


def write_embeddings(
    sets: Sequence[EmbeddingSet], root: Path, meta: Optional[Dict[str, Any]] = None
) -> None:
    root = Path(root)
    for item in sets:
        write_fmat(item.embeddings, root / f"{item.recording_id}.fmat")
        dump_json(
            {
                "recording_id": item.recording_id,
                "starts": item.starts,
                "ends": item.ends,
            },
            root / f"{item.recording_id}.times.json",
        )
    dump_json(
        {**(meta or {}), "recordings": [item.recording_id for item in sets]},
        root / INDEX,
    )


def read_embedding_index(root: Path) -> Dict[str, Any]:
    path = Path(root) / INDEX
    if not path.is_file():
        raise DataError(f"Каталог эмбеддингов не найден или пуст: {root}")
    return load_json(path)


def read_embeddings(root: Path) -> List[EmbeddingSet]:
    """Прочитать эмбеддинги в порядке записей индекса."""
    root = Path(root)
    sets = []
    for recording_id in read_embedding_index(root)["recordings"]:
        embeddings = read_fmat(root / f"{recording_id}.fmat")
        times = load_json(root / f"{recording_id}.times.json")
        sets.append(
            EmbeddingSet(
                recording_id=recording_id,
                embeddings=embeddings,
                starts=[float(s) for s in times["starts"]],
                ends=[float(e) for e in times["ends"]],
            )
        )
    return sets
