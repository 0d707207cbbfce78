from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from src.application.networks import EmbeddingNetwork
from src.application.services.trainer import make_windows
from src.core.config import config
from src.core.logging import get_logger
from src.core.models.corpus import FeatureSequence, LabeledWindow
from src.core.models.embedding import EmbeddingSet
from src.core.tensor import Tensor, no_grad


class ExtractionService:
    """Извлечение эмбеддингов скользящим окном без записи графа."""

    def __init__(
        self, network: EmbeddingNetwork, window_frames: int, window_shift: int
    ):
        self.network = network
        self.window_frames = window_frames
        self.window_shift = window_shift
        self.logger = get_logger(__name__)

    def windows(self, seq: FeatureSequence) -> List[LabeledWindow]:
        """
        Окна записи; запись короче окна даёт одно окно на всю длину.
        """
        windows = make_windows(
            seq, self.window_frames, self.window_shift, training=False
        )
        if not windows and seq.num_frames > 0:
            windows = [
                LabeledWindow(
                    features=Tensor(seq.features),
                    speaker_id=None,
                    recording_id=seq.recording_id,
                    start_frame=0,
                    frame_period_s=seq.frame_period_s,
                )
            ]
        return windows

    def extract(self, seq: FeatureSequence) -> EmbeddingSet:
        """
        :param seq: Запись
        :return: EmbeddingSet (N окон × bottleneck_dim)
        """
        windows = self.windows(seq)
        with no_grad():
            rows = [
                self.network.embed(w.features).embedding.numpy()[0] for w in windows
            ]
        embeddings = (
            np.stack(rows) if rows else np.zeros((0, self.network.embedding_dim))
        )
        return EmbeddingSet(
            recording_id=seq.recording_id,
            embeddings=embeddings,
            starts=[w.start_s for w in windows],
            ends=[w.end_s for w in windows],
        )

    def extract_all(
        self, sequences: Sequence[FeatureSequence], jobs: Optional[int] = None
    ) -> List[EmbeddingSet]:
        """
        Извлечь эмбеддинги всех записей; порядок результата совпадает
        с порядком записей при любом числе потоков.
        """
        jobs = jobs or config.JOBS
        if jobs <= 1:
            results = [self.extract(seq) for seq in sequences]
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(self.extract, sequences))
        self.logger.info(
            f"{self.network.system}: извлечено "
            f"{sum(r.num_windows for r in results)} эмбеддингов "
            f"из {len(results)} записей"
        )
        return results
