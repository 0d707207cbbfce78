from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.application.inputs.experiment import ExperimentConfig, TrainConfig
from src.application.layers.asoftmax import AngularSoftmax
from src.application.networks import EmbeddingNetwork
from src.application.services.optimizer import AdamOptimizer
from src.core.abstractions.encoder import BaseEncoder
from src.core.exceptions import ConfigError, NumericError
from src.core.logging import get_logger
from src.core.models.corpus import FeatureSequence, LabeledWindow
from src.core.tensor import Tensor, no_grad
from src.core.tensor import functional as F
from src.core.types import LossTraceRow

logger = get_logger(__name__)


def window_offsets(num_frames: int, window_frames: int, window_shift: int) -> List[int]:
    """Начала окон: 0, shift, 2·shift, ... пока окно помещается целиком."""
    if num_frames < window_frames:
        return []
    return list(range(0, num_frames - window_frames + 1, window_shift))


def make_windows(
    seq: FeatureSequence,
    window_frames: int,
    window_shift: int,
    speaker_index: Optional[Dict[str, int]] = None,
    training: bool = True,
) -> List[LabeledWindow]:
    """
    Нарезать запись на окна.

    :param seq: Запись с покадровыми метками
    :param window_frames: Длина окна в кадрах
    :param window_shift: Шаг окна в кадрах
    :param speaker_index: Метка диктора -> номер класса
    :param training: В режиме обучения окна со сменой диктора отбрасываются,
        в режиме извлечения сохраняются без метки
    :return: Список окон (пустой, если запись короче окна)
    """
    windows = []
    for offset in window_offsets(seq.num_frames, window_frames, window_shift):
        features = Tensor(seq.features[offset : offset + window_frames])
        speaker_id = None
        if training:
            labels = set(seq.labels[offset : offset + window_frames])
            if len(labels) != 1:
                continue
            label = labels.pop()
            if speaker_index is not None:
                if label not in speaker_index:
                    continue
                speaker_id = speaker_index[label]
        windows.append(
            LabeledWindow(
                features=features,
                speaker_id=speaker_id,
                recording_id=seq.recording_id,
                start_frame=offset,
                frame_period_s=seq.frame_period_s,
            )
        )
    return windows


def total_loss(logits: Tensor, label: int, penalties: Sequence[Tensor]) -> Tensor:
    """Кросс-энтропия по логитам плюс сумма штрафов слоёв внимания."""
    loss = F.cross_entropy(logits, label)
    for penalty in penalties:
        loss = F.add(loss, penalty)
    return loss


def split_recordings(
    recordings: Sequence[FeatureSequence], val_fraction: float, seed: Optional[int]
) -> Tuple[List[FeatureSequence], List[FeatureSequence]]:
    """
    Разбиение train/validation на уровне записей.

    :return: (обучающие, валидационные) в исходном порядке
    """
    count = len(recordings)
    n_val = int(round(val_fraction * count))
    if val_fraction > 0 and count >= 2:
        n_val = min(max(n_val, 1), count - 1)
    else:
        n_val = 0
    order = np.random.default_rng(seed).permutation(count)
    val_idx = set(order[:n_val].tolist())
    train = [r for i, r in enumerate(recordings) if i not in val_idx]
    val = [r for i, r in enumerate(recordings) if i in val_idx]
    return train, val


def speaker_index_of(sequences: Sequence[FeatureSequence]) -> Dict[str, int]:
    speakers = sorted({label for seq in sequences for label in seq.labels})
    return {speaker: i for i, speaker in enumerate(speakers)}


@dataclass
class TrainResult:
    """Обученная сеть и журнал эпох."""

    network: EmbeddingNetwork
    speakers: List[str]
    trace: List[LossTraceRow] = field(default_factory=list)
    pretrain_traces: Dict[str, List[LossTraceRow]] = field(default_factory=dict)


class TrainerService:
    """Предобучение энкодеров на кадрах и совместное обучение сети."""

    def __init__(self, cfg: ExperimentConfig):
        """
        :param cfg: Конфигурация эксперимента
        """
        self.cfg = cfg
        self.train_cfg: TrainConfig = cfg.train
        self.logger = get_logger(__name__)

    def _batches(self, count: int, rng: np.random.Generator) -> List[np.ndarray]:
        order = rng.permutation(count)
        size = self.train_cfg.batch_size
        return [order[i : i + size] for i in range(0, count, size)]

    @staticmethod
    def _check_finite(value: float, where: str) -> None:
        if not np.isfinite(value):
            raise NumericError(f"{where}: функция потерь не конечна ({value})")

    @staticmethod
    def _check_features(sequences: Sequence[FeatureSequence], where: str) -> None:
        for seq in sequences:
            if not np.all(np.isfinite(seq.features)):
                raise NumericError(
                    f"{where}: нечисловые признаки в записи {seq.recording_id}"
                )

    def pretrain_frame_level(
        self,
        encoder: BaseEncoder,
        sequences: Sequence[FeatureSequence],
        epochs: Optional[int] = None,
        name: str = "encoder",
    ) -> List[LossTraceRow]:
        """
        Покадровое предобучение энкодера с временным нормированным
        классификатором; классификатор затем отбрасывается.

        :param encoder: Энкодер (обновляется на месте)
        :param sequences: Обучающие записи с покадровыми метками
        :param epochs: Число эпох (по умолчанию train.pretrain_epochs)
        :param name: Имя для журнала
        :return: По эпохе: средняя потеря и покадровая точность
        """
        epochs = self.train_cfg.pretrain_epochs if epochs is None else epochs
        if epochs == 0:
            return []
        self._check_features(sequences, f"{name}: предобучение")
        speaker_index = speaker_index_of(sequences)
        windows, frame_labels = [], []
        for seq in sequences:
            for w in make_windows(
                seq,
                self.train_cfg.window_frames,
                self.train_cfg.window_shift,
                training=False,
            ):
                span = seq.labels[w.start_frame : w.start_frame + w.num_frames]
                windows.append(w)
                frame_labels.append(np.array([speaker_index[s] for s in span]))
        rng = np.random.default_rng(self.train_cfg.seed)
        classifier = AngularSoftmax(encoder.output_dim, len(speaker_index), rng)
        optimizer = AdamOptimizer(
            encoder.parameters() + classifier.parameters(),
            lr=self.train_cfg.learning_rate,
        )
        trace: List[LossTraceRow] = []
        for epoch in range(1, epochs + 1):
            losses, correct, frames = [], 0, 0
            for batch in self._batches(len(windows), rng):
                for i in batch:
                    H = encoder.forward(windows[i].features)
                    logits = classifier.forward(H)
                    loss = F.cross_entropy_rows(logits, frame_labels[i])
                    self._check_finite(loss.item(), f"{name}: предобучение")
                    F.scale(loss, 1.0 / len(batch)).backward()
                    losses.append(loss.item())
                    predicted = logits.data.argmax(axis=1)
                    correct += int(np.sum(predicted == frame_labels[i]))
                    frames += len(frame_labels[i])
                optimizer.step()
                optimizer.zero_grad()
            row: LossTraceRow = {
                "epoch": epoch,
                "train_loss": float(np.mean(losses)) if losses else float("nan"),
                "val_acc": correct / frames if frames else float("nan"),
            }
            trace.append(row)
            self.logger.info(
                f"{name}: предобучение, эпоха {epoch}/{epochs}, потеря "
                f"{row['train_loss']:.4f}, точность по кадрам {row['val_acc']:.3f}"
            )
        return trace

    def _labeled_windows(
        self, sequences: Sequence[FeatureSequence], speaker_index: Dict[str, int]
    ) -> List[LabeledWindow]:
        return [
            w
            for seq in sequences
            for w in make_windows(
                seq,
                self.train_cfg.window_frames,
                self.train_cfg.window_shift,
                speaker_index,
            )
        ]

    @staticmethod
    def accuracy(network: EmbeddingNetwork, windows: Sequence[LabeledWindow]) -> float:
        """Доля окон, у которых argmax логитов совпадает с диктором."""
        if not windows:
            return float("nan")
        correct = 0
        with no_grad():
            for w in windows:
                logits, _ = network.logits(w.features)
                correct += int(int(np.argmax(logits.data)) == w.speaker_id)
        return correct / len(windows)

    def train(
        self,
        network: EmbeddingNetwork,
        sequences: Sequence[FeatureSequence],
        epochs: Optional[int] = None,
    ) -> List[LossTraceRow]:
        """
        Совместное обучение сети мини-батчами с Adam.

        :param network: Сеть (обновляется на месте)
        :param sequences: Записи обучающей части
        :param epochs: Число эпох (по умолчанию train.epochs)
        :return: По эпохе: средняя потеря и точность на валидации
        :raises ConfigError: если в корпусе меньше двух дикторов
        :raises NumericError: при нечисловой потере или признаках
        """
        speaker_index = speaker_index_of(sequences)
        if len(speaker_index) < 2:
            raise ConfigError(
                f"Для обучения нужно ≥ 2 дикторов, найдено {len(speaker_index)}"
            )
        self._check_features(sequences, network.system)
        epochs = self.train_cfg.epochs if epochs is None else epochs
        train_seqs, val_seqs = split_recordings(
            sequences, self.train_cfg.val_fraction, self.train_cfg.seed
        )
        train_windows = self._labeled_windows(train_seqs, speaker_index)
        val_windows = self._labeled_windows(val_seqs, speaker_index)
        if not val_windows:
            self.logger.warning(f"{network.system}: нет окон для валидации")
        self.logger.info(
            f"{network.system}: {len(train_windows)} обучающих и "
            f"{len(val_windows)} валидационных окон, {len(speaker_index)} дикторов"
        )

        rng = np.random.default_rng(self.train_cfg.seed)
        optimizer = AdamOptimizer(network.parameters(), lr=self.train_cfg.learning_rate)
        trace: List[LossTraceRow] = []
        for epoch in range(1, epochs + 1):
            losses = []
            for batch in self._batches(len(train_windows), rng):
                for i in batch:
                    window = train_windows[i]
                    logits, output = network.logits(window.features)
                    loss = total_loss(logits, window.speaker_id, output.penalties)
                    self._check_finite(loss.item(), network.system)
                    F.scale(loss, 1.0 / len(batch)).backward()
                    losses.append(loss.item())
                optimizer.step()
                optimizer.zero_grad()
                self.logger.debug(
                    f"{network.system}: эпоха {epoch}, батч из {len(batch)} окон, "
                    f"потеря {np.mean(losses[-len(batch):]):.4f}"
                )
            row: LossTraceRow = {
                "epoch": epoch,
                "train_loss": float(np.mean(losses)) if losses else float("nan"),
                "val_acc": self.accuracy(network, val_windows),
            }
            trace.append(row)
            self.logger.info(
                f"{network.system}: эпоха {epoch}/{epochs}, потеря "
                f"{row['train_loss']:.4f}, точность на валидации {row['val_acc']:.3f}"
            )
        return trace

    def fit(
        self,
        network: EmbeddingNetwork,
        sequences: Sequence[FeatureSequence],
        pretrained: Sequence[str] = (),
    ) -> TrainResult:
        """
        Полный цикл: покадровое предобучение энкодеров (кроме уже
        инициализированных из чекпоинтов), затем совместное обучение.

        :param network: Сеть системы
        :param sequences: Записи обучающей части
        :param pretrained: Энкодеры, загруженные из чекпоинтов d-vector
        :return: TrainResult
        """
        speakers = sorted(speaker_index_of(sequences))
        if len(speakers) < 2:
            raise ConfigError(
                f"Для обучения нужно ≥ 2 дикторов, найдено {len(speakers)}"
            )
        result = TrainResult(network=network, speakers=speakers)
        for name, encoder in network.encoders.items():
            if name in pretrained:
                self.logger.info(
                    f"{name}: энкодер взят из чекпоинта, предобучение пропущено"
                )
                continue
            result.pretrain_traces[name] = self.pretrain_frame_level(
                encoder, sequences, name=name
            )
        result.trace = self.train(network, sequences)
        return result
